#pragma once

#include "quadosc/crawler.hpp"
#include "quadosc/quadrature.hpp"
#include "quadosc/signal.hpp"

namespace quadosc::pipeline {

/// Three identical oscillators; both peripherals run `surplus` above the
/// central current.
quad::Config matched_config(const sma::ThermalParams& sma, double central_current,
                            double surplus);

struct Result {
  quad::Result quadrature;
  signal::PhaseReport phase;  // P2 primary against P1 primary
  crawler::DriveResult drive;
};

/// Oscillator network feeding the crawler: P1's primary wave drives the
/// front leg and P2's the back leg.
Result run(const quad::Config& cfg, int n_cycles, const crawler::Geometry& geometry,
           crawler::OnMapping mapping, double tau_act);

}  // namespace quadosc::pipeline

#include "quadosc/pipeline.hpp"

namespace quadosc::pipeline {

quad::Config matched_config(const sma::ThermalParams& sma, double central_current,
                            double surplus) {
  quad::Config cfg;
  for (quad::OscId id : {quad::OscId::central, quad::OscId::p1, quad::OscId::p2}) {
    auto& o = cfg.get(id);
    o.left_sma = sma;
    o.right_sma = sma;
    o.label = quad::to_string(id);
    o.current = id == quad::OscId::central ? central_current : central_current * (1.0 + surplus);
  }
  return cfg;
}

Result run(const quad::Config& cfg, int n_cycles, const crawler::Geometry& geometry,
           crawler::OnMapping mapping, double tau_act) {
  Result out;
  out.quadrature = quad::simulate(cfg, n_cycles);
  const auto& front = out.quadrature.p1_waves[0];
  const auto& back = out.quadrature.p2_waves[0];
  out.phase = signal::phase_offset(front, back);
  out.drive = crawler::drive_with_signals(geometry, front, back, mapping, tau_act);
  return out;
}

}  // namespace quadosc::pipeline

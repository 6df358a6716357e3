#ifndef CFL_EXPERIMENT_HPP
#define CFL_EXPERIMENT_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cfl/config.hpp"
#include "cfl/drive.hpp"
#include "cfl/fockspace.hpp"
#include "cfl/kubo.hpp"
#include "cfl/output.hpp"
#include "cfl/parallel.hpp"
#include "cfl/propagator.hpp"
#include "cfl/resonance.hpp"
#include "cfl/spectral.hpp"
#include "cfl/thermal.hpp"
#include "cfl/types.hpp"

namespace cfl {

struct ExperimentResult {
  Table table;
  std::map<std::string, double> diagnostics;
};

namespace detail {

// Auto truncation: enough levels that the thermal tail is below 1e-10,
// capped so casual sweeps at high temperature do not allocate dense
// kernels of several GB. Set n_max explicitly to override.
inline constexpr int kAutoLevelCap = 48;

inline int pick_n_max(const ExperimentConfig& c) {
  if (c.n_max > 0) return c.n_max;
  const double omega_min = std::min(c.omega1, c.omega2);
  const int n = occupancy_levels(c.beta, omega_min, 1e-10, 1 << 20) + 2;
  return std::min(n, kAutoLevelCap);
}

inline int pick_n_max_at(const ExperimentConfig& c, double beta) {
  if (c.n_max > 0) return c.n_max;
  const double omega_min = std::min(c.omega1, c.omega2);
  const int n = occupancy_levels(beta, omega_min, 1e-10, 1 << 20) + 2;
  return std::min(n, kAutoLevelCap);
}

inline DriveSignal make_drive(const ExperimentConfig& c, double gamma) {
  if (c.drive == "ramp_exp") return DriveSignal::ramp_exp(gamma, c.eta);
  if (c.drive == "gaussian_pulse") return DriveSignal::gaussian_pulse(gamma, c.tau);
  return load_drive(c.drive_file);
}

inline TimeGrid make_grid(const ExperimentConfig& c, const DriveSignal& drive) {
  const double t_end = c.horizon > 0.0 ? c.horizon : decay_time(drive);
  double t0 = 0.0;
  if (drive.kind() == DriveKind::gaussian_pulse) t0 = -t_end;
  if (drive.kind() == DriveKind::tabulated) t0 = drive.times().front();
  const int n = static_cast<int>(std::ceil((t_end - t0) / c.dt - 1e-9)) + 1;
  return {t0, t0 + (n - 1) * c.dt, c.dt};
}

inline ComplexMatrix make_coupling(const ExperimentConfig& c, const ProductBasis& basis) {
  return c.coupling == "full" ? full_coupling(basis) : rwa_coupling(basis);
}

inline void merge_meta(std::map<std::string, double>& diag, const std::string& prefix,
                       const DissipationResult& r) {
  for (const auto& [k, v] : r.meta) diag[prefix + "." + k] = v;
}

inline ExperimentResult run_compare(const ExperimentConfig& c) {
  const auto requested = split_routes(c.routes);
  const std::set<std::string> want(requested.begin(), requested.end());

  const ProductBasis basis({c.omega1, c.mass1}, {c.omega2, c.mass2}, pick_n_max(c));
  const ThermalEnsemble ens = make_ensemble(basis, c.beta);
  const ComplexMatrix a = make_coupling(c, basis);
  const DriveSignal drive = make_drive(c, c.gamma);

  ExperimentResult out;
  out.table.columns = {"route", "delta_e", "rel_gap_vs_spectral"};

  const DissipationResult de_s = delta_e_spectral(amplitudes(a, drive, basis), ens, basis);
  merge_meta(out.diagnostics, "spectral", de_s);
  if (want.count("spectral")) out.table.rows.push_back({std::string("spectral"), de_s.delta_e, 0.0});

  if (want.count("kubo_freq") || want.count("kubo_time")) {
    const ResponseFunction resp(a, ens, basis);
    if (want.count("kubo_freq")) {
      const DissipationResult r = delta_e_kubo_freq(resp, drive);
      merge_meta(out.diagnostics, "kubo_freq", r);
      out.table.rows.push_back(
          {std::string("kubo_freq"), r.delta_e, relative_gap(r.delta_e, de_s.delta_e)});
    }
    if (want.count("kubo_time")) {
      const TimeGrid grid = make_grid(c, drive);
      const DissipationResult r = delta_e_kubo_time(resp, drive, grid, ConvolutionPath::modal);
      merge_meta(out.diagnostics, "kubo_time", r);
      out.table.rows.push_back(
          {std::string("kubo_time"), r.delta_e, relative_gap(r.delta_e, de_s.delta_e)});
      if (!c.history_out.empty()) {
        const ForceHistory h = compute_force_history(resp, drive, grid, ConvolutionPath::modal);
        Table ht;
        ht.provenance = provenance_line(c);
        ht.columns = {"t", "q", "v", "F_f"};
        for (int i = 0; i < grid.points(); ++i)
          ht.rows.push_back({h.t[i], h.q[i], h.v[i], h.force[i]});
        write_text_file(c.history_out, csv_string(ht));
      }
    }
  }

  if (want.count("propagator")) {
    PropagationRun run;
    run.grid = make_grid(c, drive);
    run.weight_cutoff = c.weight_cutoff;
    run.jobs = c.jobs;
    const DissipationResult r = delta_e_propagated(ens, a, drive, basis, run);
    merge_meta(out.diagnostics, "propagator", r);
    out.table.rows.push_back(
        {std::string("propagator"), r.delta_e, relative_gap(r.delta_e, de_s.delta_e)});
  }
  return out;
}

inline ExperimentResult run_sweep_temperature(const ExperimentConfig& c) {
  const std::vector<double> betas = c.beta_list.empty() ? std::vector<double>{c.beta} : c.beta_list;
  const int n = static_cast<int>(betas.size());
  std::vector<double> de(n), form_gap(n);
  parallel_for(n, c.jobs, [&](int i) {
    ExperimentConfig ci = c;
    ci.beta = betas[i];
    const ProductBasis basis({c.omega1, c.mass1}, {c.omega2, c.mass2}, pick_n_max_at(c, betas[i]));
    const ThermalEnsemble ens = make_ensemble(basis, betas[i]);
    const DissipationResult r =
        delta_e_spectral(amplitudes(make_coupling(c, basis), make_drive(c, c.gamma), basis), ens,
                         basis);
    de[i] = r.delta_e;
    form_gap[i] = r.meta.at("form_gap");
  });
  ExperimentResult out;
  out.table.columns = {"beta", "delta_e"};
  for (int i = 0; i < n; ++i) out.table.rows.push_back({betas[i], de[i]});
  out.diagnostics["max_form_gap"] = *std::max_element(form_gap.begin(), form_gap.end());
  return out;
}

inline ExperimentResult run_sweep_detuning(const ExperimentConfig& c) {
  ResonanceConfig rc;
  rc.omega1 = c.omega1;
  rc.omega2 = c.omega1;
  rc.beta = c.beta;
  rc.gamma = c.gamma;
  rc.eta = c.eta;
  const DetuningSweep sweep =
      compare_routes_near_resonance(rc, c.detuning_points, c.detuning_span, c.n_max, c.jobs);
  ExperimentResult out;
  out.table.columns = {"detuning", "delta_e_spectral", "delta_e_closed_form", "rel_gap"};
  for (const auto& r : sweep.rows)
    out.table.rows.push_back({r.detuning, r.delta_e_spectral, r.delta_e_closed, r.rel_gap});
  out.diagnostics["n_max"] = sweep.n_max;
  out.diagnostics["integrated_spectral"] = sweep.integrated_spectral;
  out.diagnostics["integrated_closed"] = sweep.integrated_closed;
  out.diagnostics["closed_weight"] = sweep.closed_weight;
  out.diagnostics["window_mass"] = sweep.window_mass;
  out.diagnostics["integrated_ratio"] = sweep.integrated_ratio;
  out.diagnostics["asymmetry"] = sweep.asymmetry;
  return out;
}

inline ExperimentResult run_sweep_eta(const ExperimentConfig& c) {
  const std::vector<double> etas = c.eta_list.empty() ? std::vector<double>{c.eta} : c.eta_list;
  ResonanceConfig rc;
  rc.omega1 = c.omega1;
  rc.omega2 = c.omega1;
  rc.beta = c.beta;
  rc.gamma = c.gamma;
  const auto rows = eta_scaling_study(rc, etas, c.detuning_points, c.jobs);
  ExperimentResult out;
  out.table.columns = {"eta", "delta_e", "eta_delta_e"};
  for (const auto& r : rows) out.table.rows.push_back({r.eta, r.delta_e, r.eta_delta_e});
  return out;
}

inline ExperimentResult run_propagate(const ExperimentConfig& c) {
  const std::vector<double> gammas =
      c.gamma_list.empty() ? std::vector<double>{c.gamma} : c.gamma_list;
  const ProductBasis basis({c.omega1, c.mass1}, {c.omega2, c.mass2}, pick_n_max(c));
  const ThermalEnsemble ens = make_ensemble(basis, c.beta);
  const ComplexMatrix a = make_coupling(c, basis);

  ExperimentResult out;
  out.table.columns = {"gamma", "delta_e_propagated", "delta_e_spectral", "rel_gap"};

  if (!c.energy_history_out.empty()) {
    // E(t) of the highest-weight ensemble member under the first drive
    const DriveSignal drive = make_drive(c, gammas.front());
    PropagationRun run;
    run.grid = make_grid(c, drive);
    Eigen::Index top = 0;
    ens.weights.maxCoeff(&top);
    ComplexVector psi0 = ComplexVector::Zero(basis.size());
    psi0[top] = 1.0;
    std::vector<EnergySample> history;
    propagate_state(psi0, a, drive, basis, run, &history);
    Table ht;
    ht.provenance = provenance_line(c);
    ht.columns = {"t", "energy", "norm"};
    for (const auto& s : history) ht.rows.push_back({s.t, s.energy, s.norm});
    write_text_file(c.energy_history_out, csv_string(ht));
  }

  double max_drift = 0.0, max_leak = 0.0;
  for (double g : gammas) {
    const DriveSignal drive = make_drive(c, g);
    PropagationRun run;
    run.grid = make_grid(c, drive);
    run.weight_cutoff = c.weight_cutoff;
    run.jobs = c.jobs;
    const DissipationResult rp = delta_e_propagated(ens, a, drive, basis, run);
    const DissipationResult rs = delta_e_spectral(amplitudes(a, drive, basis), ens, basis);
    out.table.rows.push_back({g, rp.delta_e, rs.delta_e, relative_gap(rp.delta_e, rs.delta_e)});
    max_drift = std::max(max_drift, rp.meta.at("norm_drift"));
    max_leak = std::max(max_leak, rp.meta.at("leakage"));
    out.diagnostics["dropped_weight"] = rp.meta.at("dropped_weight");
    out.diagnostics["states"] = rp.meta.at("states");
  }
  out.diagnostics["norm_drift"] = max_drift;
  out.diagnostics["leakage"] = max_leak;
  return out;
}

inline ExperimentResult run_audit(const ExperimentConfig& c) {
  const std::vector<double> etas = c.eta_list.empty() ? std::vector<double>{c.eta} : c.eta_list;
  for (size_t i = 1; i < etas.size(); ++i)
    if (!(etas[i] < etas[i - 1]))
      throw config_error("audit-counter-rotating: eta_list must be strictly decreasing");
  AuditConfig ac;
  ac.omega1 = c.omega1;
  ac.omega2 = c.omega2;
  ac.beta = c.beta;
  ac.gamma = c.gamma;
  ac.etas = etas;
  ac.n_max = c.n_max > 0 ? c.n_max : pick_n_max(c);
  ac.dt = c.dt;
  ac.weight_cutoff = c.weight_cutoff;
  ac.jobs = c.jobs;
  const auto rows = counter_rotating_audit(ac);
  ExperimentResult out;
  out.table.columns = {"eta", "delta_e_rwa", "delta_e_full", "rel_contribution"};
  for (const auto& r : rows)
    out.table.rows.push_back({r.eta, r.delta_e_rwa, r.delta_e_full, r.rel_contribution});
  out.diagnostics["n_max"] = ac.n_max;
  return out;
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& c) {
  validate_config(c);
  ExperimentResult out;
  if (c.experiment == "compare") out = detail::run_compare(c);
  else if (c.experiment == "sweep-temperature") out = detail::run_sweep_temperature(c);
  else if (c.experiment == "sweep-detuning") out = detail::run_sweep_detuning(c);
  else if (c.experiment == "sweep-eta") out = detail::run_sweep_eta(c);
  else if (c.experiment == "propagate") out = detail::run_propagate(c);
  else if (c.experiment == "audit-counter-rotating") out = detail::run_audit(c);
  else throw config_error("unknown experiment '" + c.experiment + "'");
  out.table.provenance = provenance_line(c);
  return out;
}

}  // namespace cfl

#endif

// Command-line front end: trajectory/master-equation simulation, the
// two-level gain scan, cross-section fits and symmetry checks. Every
// command writes a manifest.json recording input hashes and output
// checksums; outputs are byte-identical across reruns with the same
// inputs in serial mode (DECOLAB_THREADS=1).
//
// Exit codes: 0 success, 1 runtime or numeric failure (including a failing
// symmetry verdict), 2 usage or configuration error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "decolab/diffract.hpp"
#include "decolab/dyson.hpp"
#include "decolab/lindblad.hpp"
#include "decolab/manifest.hpp"
#include "decolab/qcore.hpp"
#include "decolab/symmetry.hpp"
#include "decolab/trajectories.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& contents) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << contents;
}

decolab::trajectories::SSEConfig sse_config_from_json(const json& j) {
  decolab::trajectories::SSEConfig cfg;
  cfg.hamiltonian = decolab::matrix_from_json(j.at("hamiltonian"));
  for (const auto& ch : j.at("channels")) {
    cfg.channels.push_back(
        {decolab::matrix_from_json(ch.at("operator")), ch.at("gamma").get<double>()});
  }
  cfg.initial_state = decolab::vector_from_json(j.at("initial_state"));
  cfg.t_end = j.at("t_end").get<double>();
  cfg.n_traj = j.at("n_traj").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.dt = j.contains("dt") ? j.at("dt").get<double>()
                            : decolab::trajectories::SSEConfig::default_dt(cfg.hamiltonian,
                                                                           cfg.channels);
  if (j.contains("store_stride")) cfg.store_stride = j.at("store_stride").get<int>();
  cfg.validate();
  return cfg;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  Timer timer;
  std::string config_text;
  decolab::trajectories::SSEConfig cfg;
  try {
    config_text = read_file(config_path);
    cfg = sse_config_from_json(json::parse(config_text));
  } catch (const std::exception& e) {
    std::cerr << "simulate: bad config: " << e.what() << "\n";
    return 2;
  }

  using namespace decolab;
  if (cfg.stability_warning()) {
    std::cerr << "simulate: warning: dt * max(gamma ||L||^2) = " << cfg.stability_parameter()
              << " exceeds 0.1; expect integrator bias\n";
  }

  const auto ensemble = trajectories::run_ensemble(cfg);

  lindblad::DephasingGenerator gen;
  gen.hamiltonian = cfg.hamiltonian;
  gen.channels = cfg.channels;
  const auto rho0 = DensityMatrix::pure(cfg.initial_state);
  const auto det = lindblad::propagate(gen, rho0, cfg.t_end, cfg.dt,
                                       {.store_stride = cfg.store_stride});

  const Eigen::Index d = cfg.dim();
  std::ostringstream csv;
  csv.precision(12);
  csv << "time";
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      csv << ",re_rho" << i << j << "_ens,re_rho" << i << j << "_det,im_rho" << i << j
          << "_ens,im_rho" << i << j << "_det,err_rho" << i << j;
    }
  }
  csv << "\n";
  for (std::size_t k = 0; k < ensemble.times.size(); ++k) {
    csv << ensemble.times[k];
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i; j < d; ++j) {
        csv << "," << ensemble.mean_density[k](i, j).real() << "," << det.densities[k](i, j).real()
            << "," << ensemble.mean_density[k](i, j).imag() << ","
            << det.densities[k](i, j).imag() << ","
            << std::max(ensemble.se_real[k](i, j), ensemble.se_imag[k](i, j));
      }
    }
    csv << "\n";
  }
  const std::string ens_path = (fs::path(out_dir) / "ensemble_vs_deterministic.csv").string();
  write_file(ens_path, csv.str());

  // Convergence of the ensemble toward the deterministic solution over
  // decades of n_traj.
  std::ostringstream conv;
  conv.precision(12);
  conv << "n_traj,max_entry_error\n";
  for (int n : {cfg.n_traj / 100, cfg.n_traj / 10, cfg.n_traj}) {
    if (n < 1) continue;
    auto sub_cfg = cfg;
    sub_cfg.n_traj = n;
    const auto sub = trajectories::run_ensemble(sub_cfg);
    double err = 0.0;
    for (std::size_t k = 0; k < sub.times.size(); ++k) {
      err = std::max(err, (sub.mean_density[k] - det.densities[k]).cwiseAbs().maxCoeff());
    }
    conv << n << "," << err << "\n";
  }
  const std::string conv_path = (fs::path(out_dir) / "convergence.csv").string();
  write_file(conv_path, conv.str());

  decolab::RunManifest manifest;
  manifest.command = "simulate";
  manifest.config_hash = decolab::fnv1a64_hex(config_text);
  manifest.seed = cfg.seed;
  manifest.add_output(ens_path);
  manifest.add_output(conv_path);
  manifest.wall_time_ms = timer.ms();
  manifest.write(out_dir);
  std::cout << "simulate: wrote " << ens_path << " and " << conv_path << "\n";
  return 0;
}

int cmd_dyson(double gamma_min, double gamma_max, int gamma_steps, double domega_min,
              double domega_max, int domega_steps, double g, const std::string& out_dir) {
  Timer timer;
  if (gamma_steps < 1 || domega_steps < 1 || gamma_min <= 0.0 || gamma_max < gamma_min ||
      domega_max < domega_min) {
    std::cerr << "dyson: bad grid range\n";
    return 2;
  }
  auto linspace = [](double lo, double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) {
      v.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    }
    return v;
  };
  const auto rows =
      decolab::dyson::gain_scan(linspace(gamma_min, gamma_max, gamma_steps),
                                linspace(domega_min, domega_max, domega_steps), g);

  std::ostringstream csv;
  csv.precision(12);
  csv << "gamma_eff,domega,phi_gamma,exact_slope,predicted_slope\n";
  for (const auto& r : rows) {
    csv << r.dephasing_rate << "," << r.detuning << "," << r.gain << "," << r.exact_slope << ","
        << 2.0 * g * g * r.gain << "\n";
  }
  const std::string path = (fs::path(out_dir) / "gain_scan.csv").string();
  write_file(path, csv.str());

  decolab::RunManifest manifest;
  manifest.command = "dyson";
  std::ostringstream cfg;
  cfg << gamma_min << " " << gamma_max << " " << gamma_steps << " " << domega_min << " "
      << domega_max << " " << domega_steps << " " << g;
  manifest.config_hash = decolab::fnv1a64_hex(cfg.str());
  manifest.add_output(path);
  manifest.wall_time_ms = timer.ms();
  manifest.write(out_dir);
  std::cout << "dyson: wrote " << path << " (" << rows.size() << " grid points)\n";
  return 0;
}

int cmd_fit(const std::string& model_name, const std::string& data_path,
            const std::string& freeze, const std::string& weights, const std::string& out_dir) {
  Timer timer;
  using namespace decolab::diffract;
  FitModel model;
  FitOptions opts;
  std::vector<CrossSectionPoint> data;
  try {
    model = FitModel::from_name(model_name);
    if (!freeze.empty()) {
      const auto eq = freeze.find('=');
      if (eq == std::string::npos || freeze.substr(0, eq) != "phi") {
        throw std::invalid_argument("--freeze expects phi=<value>, got '" + freeze + "'");
      }
      opts.freeze_phi = std::stod(freeze.substr(eq + 1));
    }
    if (weights == "unit") {
      opts.weighting = Weighting::Unit;
    } else if (weights == "inv") {
      opts.weighting = Weighting::InverseVariance;
    } else if (!weights.empty()) {
      throw std::invalid_argument("--weights must be inv or unit");
    }
    data = load_dataset(data_path);
  } catch (const std::exception& e) {
    std::cerr << "fit: " << e.what() << "\n";
    return 2;
  }

  const FitResult result = fit(model, data, opts);
  const auto files = write_report({result}, data, out_dir);

  decolab::RunManifest manifest;
  manifest.command = "fit " + model.name();
  manifest.config_hash = decolab::fnv1a64_hex(model_name + "|" + freeze + "|" + weights);
  manifest.dataset_checksum = decolab::file_checksum(data_path);
  for (const auto& f : files) manifest.add_output(f);
  manifest.wall_time_ms = timer.ms();
  manifest.write(out_dir);

  std::cout << model.name() << ": n=" << result.n << " n_f=" << result.n_f;
  for (const auto& p : result.params) {
    std::cout << "  " << p.name << "=" << p.value << "+-" << p.err_naive;
  }
  std::cout << "  delta_w=" << 100.0 * result.delta_w << "%  delta_L2=" << result.delta_l2
            << " mb  chi2_w=" << result.chi2_w << "\n";
  return 0;
}

int cmd_symcheck(const std::string& family_path, const std::string& out_dir) {
  Timer timer;
  using namespace decolab::symmetry;
  std::string family_text;
  TransformKind kind{};
  LabelledBasis basis;
  ChannelFamily family;
  decolab::ComplexMatrix hamiltonian;
  try {
    family_text = read_file(family_path);
    const json j = json::parse(family_text);

    const auto& jb = j.at("basis");
    if (jb.contains("kinds")) {
      basis.labels = jb.at("labels").get<std::vector<std::string>>();
      for (const auto& k : jb.at("kinds")) {
        const std::string s = k.get<std::string>();
        if (s == "matter") {
          basis.kinds.push_back(ParticleKind::Matter);
        } else if (s == "antimatter") {
          basis.kinds.push_back(ParticleKind::Antimatter);
        } else if (s == "neutral") {
          basis.kinds.push_back(ParticleKind::Neutral);
        } else {
          throw std::invalid_argument("basis kind must be matter/antimatter/neutral");
        }
      }
      basis.conjugate = jb.at("conjugate").get<std::vector<int>>();
      basis.validate();
    } else {
      basis = LabelledBasis::from_labels(jb.at("labels").get<std::vector<std::string>>());
    }

    const std::string t = j.at("transform").get<std::string>();
    if (t == "CP") {
      kind = TransformKind::CP;
    } else if (t == "CPT") {
      kind = TransformKind::CPT;
    } else {
      throw std::invalid_argument("transform must be CP or CPT");
    }

    family.basis = basis;
    for (const auto& ch : j.at("channels")) {
      DiagonalChannel dc;
      const auto amps = ch.at("amplitudes").get<std::vector<double>>();
      dc.amplitudes = Eigen::Map<const decolab::RealVector>(amps.data(),
                                                            static_cast<Eigen::Index>(amps.size()));
      dc.gamma = ch.at("gamma").get<double>();
      family.channels.push_back(std::move(dc));
    }

    hamiltonian = j.contains("hamiltonian")
                      ? decolab::matrix_from_json(j.at("hamiltonian"))
                      : decolab::ComplexMatrix::Zero(basis.dim(), basis.dim());
  } catch (const std::exception& e) {
    std::cerr << "symcheck: bad family spec: " << e.what() << "\n";
    return 2;
  }

  const SymmetryVerdict verdict = check_generator_symmetry(kind, hamiltonian, family);
  const std::string path = (fs::path(out_dir) / "verdict.json").string();
  write_file(path, verdict.to_json().dump(2) + "\n");

  decolab::RunManifest manifest;
  manifest.command = "symcheck";
  manifest.config_hash = decolab::fnv1a64_hex(family_text);
  manifest.add_output(path);
  manifest.wall_time_ms = timer.ms();
  manifest.write(out_dir);

  std::cout << "symcheck: " << (verdict.pass ? "PASS" : "FAIL") << " (" << path << ")\n";
  for (const auto& msg : verdict.messages) std::cout << "  " << msg << "\n";
  return verdict.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decolab: dephasing Lindblad laboratory and diffractive cross-section fits"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", data_path, model_name, freeze, weights, family_path;
  double gamma_min = 0.25, gamma_max = 4.0, domega_min = 1.0, domega_max = 2.0, g = 1e-2;
  int gamma_steps = 12, domega_steps = 3;

  auto* simulate = app.add_subcommand("simulate", "trajectory ensemble vs deterministic propagation");
  simulate->add_option("--config", config_path, "model spec JSON")->required();
  simulate->add_option("--out", out_dir, "output directory");

  auto* dyson = app.add_subcommand("dyson", "decoherence-gain scan over (Gamma, domega)");
  dyson->add_option("--gamma-min", gamma_min);
  dyson->add_option("--gamma-max", gamma_max);
  dyson->add_option("--gamma-steps", gamma_steps);
  dyson->add_option("--domega-min", domega_min);
  dyson->add_option("--domega-max", domega_max);
  dyson->add_option("--domega-steps", domega_steps);
  dyson->add_option("--g", g, "perturbative coupling");
  dyson->add_option("--out", out_dir, "output directory");

  auto* fitcmd = app.add_subcommand("fit", "cross-section fit");
  fitcmd->add_option("--model", model_name, "sdf1|sdc1|sdf1s|sdf2|sdcln|sdc4|sdf1w1|sdc1w1|ddf1|ddf2|ddc1")
      ->required();
  fitcmd->add_option("--data", data_path, "dataset CSV")->required();
  fitcmd->add_option("--freeze", freeze, "phi=<value>");
  fitcmd->add_option("--weights", weights, "inv|unit (default: model convention)");
  fitcmd->add_option("--out", out_dir, "output directory");

  auto* symcheck = app.add_subcommand("symcheck", "CP/CPT constraint check of a channel family");
  symcheck->add_option("--family", family_path, "family spec JSON")->required();
  symcheck->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, out_dir);
    if (dyson->parsed()) {
      return cmd_dyson(gamma_min, gamma_max, gamma_steps, domega_min, domega_max, domega_steps, g,
                       out_dir);
    }
    if (fitcmd->parsed()) return cmd_fit(model_name, data_path, freeze, weights, out_dir);
    if (symcheck->parsed()) return cmd_symcheck(family_path, out_dir);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

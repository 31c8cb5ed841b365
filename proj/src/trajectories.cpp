#include "decolab/trajectories.hpp"

#include <Eigen/Eigenvalues>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>
#include <thread>

namespace decolab::trajectories {

namespace {

double spectral_norm(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// splitmix64: decorrelates per-trajectory streams from (seed, index).
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trajectory_seed(std::uint64_t seed, std::uint64_t traj_index) {
  return mix64(mix64(seed) ^ mix64(traj_index + 0x51a4b3c2d1e0f897ULL));
}

// Indices of the stored steps: 0, stride, 2*stride, ..., n_steps.
std::vector<std::size_t> stored_steps(std::size_t n_steps, int stride) {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s <= n_steps; s += static_cast<std::size_t>(stride)) out.push_back(s);
  if (out.back() != n_steps) out.push_back(n_steps);
  return out;
}

int thread_budget(std::size_t n_chunks) {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("DECOLAB_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return static_cast<int>(std::min<std::size_t>(n, std::max<std::size_t>(n_chunks, 1)));
}

}  // namespace

double SSEConfig::stability_parameter() const {
  double worst = 0.0;
  for (const auto& ch : channels) {
    const double n = spectral_norm(ch.op);
    worst = std::max(worst, std::abs(ch.gamma) * n * n);
  }
  return dt * worst;
}

void SSEConfig::validate(bool require_forward) const {
  if (hamiltonian.rows() != hamiltonian.cols() || hamiltonian.rows() < 1) {
    throw std::invalid_argument("SSEConfig: Hamiltonian must be square");
  }
  if (!is_hermitian(hamiltonian)) {
    throw std::invalid_argument("SSEConfig: Hamiltonian is not Hermitian");
  }
  for (const auto& ch : channels) {
    ch.validate();
    if (ch.op.rows() != dim()) throw std::invalid_argument("SSEConfig: channel dimension mismatch");
    if (require_forward && ch.gamma < 0.0) {
      throw std::invalid_argument(
          "SSEConfig: gamma < 0 is not integrable as a forward trajectory "
          "(backward channels are supported only by the averaged equations)");
    }
  }
  if (initial_state.size() != dim()) {
    throw std::invalid_argument("SSEConfig: initial state dimension mismatch");
  }
  if (initial_state.norm() <= 0.0) throw std::invalid_argument("SSEConfig: initial state has zero norm");
  if (!(dt > 0.0)) throw std::invalid_argument("SSEConfig: dt must be > 0");
  if (t_end < 0.0) throw std::invalid_argument("SSEConfig: t_end must be >= 0");
  if (n_traj < 1) throw std::invalid_argument("SSEConfig: n_traj must be >= 1");
  if (store_stride < 1) throw std::invalid_argument("SSEConfig: store_stride must be >= 1");
}

double SSEConfig::default_dt(const ComplexMatrix& hamiltonian,
                             const std::vector<DephasingChannel>& channels) {
  double scale = spectral_norm(hamiltonian);
  for (const auto& ch : channels) {
    const double n = spectral_norm(ch.op);
    scale = std::max(scale, std::abs(ch.gamma) * n * n);
  }
  if (scale <= 0.0) return 1e-3;
  return 1e-3 / scale;
}

namespace {

// Heun step for the linear Stratonovich SDE: with
//   G = -i H dt - i sum_j L_j dW_j
// the predictor-corrector pair collapses to Psi <- (I + G + G^2/2) Psi.
class HeunStepper {
 public:
  explicit HeunStepper(const SSEConfig& cfg)
      : cfg_(cfg), drift_(Complex(0.0, -1.0) * cfg.hamiltonian * cfg.dt) {
    for (const auto& ch : cfg.channels) {
      noise_ops_.push_back(Complex(0.0, -1.0) * ch.op);
      noise_scale_.push_back(std::sqrt(std::max(ch.gamma, 0.0) * cfg.dt));
    }
  }

  template <typename StoreFn>
  void run(std::uint64_t traj_index, StoreFn&& store) const {
    std::mt19937_64 rng(trajectory_seed(cfg_.seed, traj_index));
    std::normal_distribution<double> gauss(0.0, 1.0);

    const auto n_steps = static_cast<std::size_t>(std::llround(cfg_.t_end / cfg_.dt));
    ComplexVector psi = cfg_.initial_state;
    ComplexMatrix g(cfg_.dim(), cfg_.dim());

    std::size_t next_store = 0;
    const auto stored = stored_steps(n_steps, cfg_.store_stride);
    if (stored[next_store] == 0) store(next_store++, psi);

    for (std::size_t step = 0; step < n_steps; ++step) {
      g = drift_;
      for (std::size_t j = 0; j < noise_ops_.size(); ++j) {
        g.noalias() += noise_ops_[j] * (noise_scale_[j] * gauss(rng));
      }
      psi = psi + g * psi + 0.5 * g * (g * psi);
      if (next_store < stored.size() && stored[next_store] == step + 1) store(next_store++, psi);
    }
  }

  const SSEConfig& cfg_;
  ComplexMatrix drift_;
  std::vector<ComplexMatrix> noise_ops_;
  std::vector<double> noise_scale_;
};

}  // namespace

StatePath integrate_sse_trajectory(const SSEConfig& cfg, std::uint64_t traj_index) {
  cfg.validate();
  const auto n_steps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
  const auto stored = stored_steps(n_steps, cfg.store_stride);

  StatePath path;
  path.times.resize(stored.size());
  path.states.resize(stored.size());
  for (std::size_t k = 0; k < stored.size(); ++k) {
    path.times[k] = cfg.dt * static_cast<double>(stored[k]);
  }
  HeunStepper stepper(cfg);
  stepper.run(traj_index, [&](std::size_t k, const ComplexVector& psi) { path.states[k] = psi; });
  return path;
}

namespace {

struct ChunkAccumulator {
  std::vector<ComplexVector> sum_psi;
  std::vector<ComplexMatrix> sum_rho;
  std::vector<RealMatrix> sum_sq_re;
  std::vector<RealMatrix> sum_sq_im;

  void init(std::size_t n_times, Eigen::Index dim) {
    sum_psi.assign(n_times, ComplexVector::Zero(dim));
    sum_rho.assign(n_times, ComplexMatrix::Zero(dim, dim));
    sum_sq_re.assign(n_times, RealMatrix::Zero(dim, dim));
    sum_sq_im.assign(n_times, RealMatrix::Zero(dim, dim));
  }

  void add(std::size_t k, const ComplexVector& psi) {
    sum_psi[k] += psi;
    const ComplexMatrix rho = psi * psi.adjoint();
    sum_rho[k] += rho;
    sum_sq_re[k].array() += rho.real().array().square();
    sum_sq_im[k].array() += rho.imag().array().square();
  }

  void merge(const ChunkAccumulator& other) {
    for (std::size_t k = 0; k < sum_psi.size(); ++k) {
      sum_psi[k] += other.sum_psi[k];
      sum_rho[k] += other.sum_rho[k];
      sum_sq_re[k] += other.sum_sq_re[k];
      sum_sq_im[k] += other.sum_sq_im[k];
    }
  }
};

constexpr std::uint64_t kChunkSize = 64;

}  // namespace

EnsembleResult run_ensemble(const SSEConfig& cfg) {
  cfg.validate();
  const auto n_steps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
  const auto stored = stored_steps(n_steps, cfg.store_stride);
  const auto n_traj = static_cast<std::uint64_t>(cfg.n_traj);
  const std::uint64_t n_chunks = (n_traj + kChunkSize - 1) / kChunkSize;

  std::vector<ChunkAccumulator> chunks(n_chunks);
  const HeunStepper stepper(cfg);

  std::atomic<std::uint64_t> next_chunk{0};
  auto worker = [&]() {
    for (;;) {
      const std::uint64_t c = next_chunk.fetch_add(1);
      if (c >= n_chunks) return;
      ChunkAccumulator& acc = chunks[c];
      acc.init(stored.size(), cfg.dim());
      const std::uint64_t lo = c * kChunkSize;
      const std::uint64_t hi = std::min(lo + kChunkSize, n_traj);
      for (std::uint64_t traj = lo; traj < hi; ++traj) {
        stepper.run(traj, [&](std::size_t k, const ComplexVector& psi) { acc.add(k, psi); });
      }
    }
  };

  const int n_threads = thread_budget(n_chunks);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Reduce in chunk order: same result for any thread count.
  ChunkAccumulator total;
  total.init(stored.size(), cfg.dim());
  for (const auto& acc : chunks) total.merge(acc);

  EnsembleResult out;
  out.n_traj = cfg.n_traj;
  out.stability_warning = cfg.stability_warning();
  out.times.resize(stored.size());
  for (std::size_t k = 0; k < stored.size(); ++k) {
    out.times[k] = cfg.dt * static_cast<double>(stored[k]);
  }
  const double inv_n = 1.0 / static_cast<double>(n_traj);
  out.mean_state.resize(stored.size());
  out.mean_density.resize(stored.size());
  out.se_real.resize(stored.size());
  out.se_imag.resize(stored.size());
  for (std::size_t k = 0; k < stored.size(); ++k) {
    out.mean_state[k] = total.sum_psi[k] * inv_n;
    out.mean_density[k] = total.sum_rho[k] * inv_n;
    // SE = sqrt(max(E[x^2] - E[x]^2, 0) / n)
    RealMatrix var_re =
        (total.sum_sq_re[k] * inv_n - out.mean_density[k].real().cwiseAbs2()).cwiseMax(0.0);
    RealMatrix var_im =
        (total.sum_sq_im[k] * inv_n - out.mean_density[k].imag().cwiseAbs2()).cwiseMax(0.0);
    out.se_real[k] = (var_re * inv_n).cwiseSqrt();
    out.se_imag[k] = (var_im * inv_n).cwiseSqrt();
  }
  return out;
}

StatePath integrate_averaged_psi(const SSEConfig& cfg) {
  cfg.validate(/*require_forward=*/false);

  const Eigen::Index d = cfg.dim();
  ComplexMatrix a = Complex(0.0, -1.0) * cfg.hamiltonian;
  for (const auto& ch : cfg.channels) {
    a.noalias() -= 0.5 * ch.gamma * ch.op * ch.op;
  }
  // Constant-coefficient linear ODE: the RK4 update is the fixed matrix
  // I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24.
  const ComplexMatrix ha = cfg.dt * a;
  ComplexMatrix step = ComplexMatrix::Identity(d, d) + ha + (ha * ha) / 2.0 +
                       (ha * ha * ha) / 6.0 + (ha * ha * ha * ha) / 24.0;

  const auto n_steps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
  const auto stored = stored_steps(n_steps, cfg.store_stride);

  StatePath path;
  path.times.reserve(stored.size());
  path.states.reserve(stored.size());
  ComplexVector psi = cfg.initial_state;
  std::size_t next_store = 0;
  if (stored[next_store] == 0) {
    path.times.push_back(0.0);
    path.states.push_back(psi);
    ++next_store;
  }
  for (std::size_t s = 0; s < n_steps; ++s) {
    psi = step * psi;
    if (next_store < stored.size() && stored[next_store] == s + 1) {
      path.times.push_back(cfg.dt * static_cast<double>(s + 1));
      path.states.push_back(psi);
      ++next_store;
    }
  }
  return path;
}

std::string ensemble_to_csv(const EnsembleResult& ens,
                            const std::vector<std::pair<int, int>>& entries) {
  std::ostringstream os;
  os.precision(12);
  os << "time";
  for (const auto& [i, j] : entries) {
    os << ",re_rho" << i << j << ",im_rho" << i << j << ",se_re_rho" << i << j << ",se_im_rho" << i
       << j;
  }
  os << "\n";
  for (std::size_t k = 0; k < ens.times.size(); ++k) {
    os << ens.times[k];
    for (const auto& [i, j] : entries) {
      os << "," << ens.mean_density[k](i, j).real() << "," << ens.mean_density[k](i, j).imag()
         << "," << ens.se_real[k](i, j) << "," << ens.se_imag[k](i, j);
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace decolab::trajectories

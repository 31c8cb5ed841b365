#include "decolab/symmetry.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

namespace decolab::symmetry {

void LabelledBasis::validate() const {
  const std::size_t n = labels.size();
  if (n == 0 || kinds.size() != n || conjugate.size() != n) {
    throw std::invalid_argument("LabelledBasis: inconsistent field sizes");
  }
  for (std::size_t k = 0; k < n; ++k) {
    const int kb = conjugate[k];
    if (kb < 0 || static_cast<std::size_t>(kb) >= n) {
      throw std::invalid_argument("LabelledBasis: conjugation index out of range");
    }
    if (conjugate[static_cast<std::size_t>(kb)] != static_cast<int>(k)) {
      throw std::invalid_argument("LabelledBasis: conjugation is not an involution");
    }
    switch (kinds[k]) {
      case ParticleKind::Neutral:
        if (kb != static_cast<int>(k)) {
          throw std::invalid_argument("LabelledBasis: neutral states must be self-conjugate");
        }
        break;
      case ParticleKind::Matter:
        if (kinds[static_cast<std::size_t>(kb)] != ParticleKind::Antimatter) {
          throw std::invalid_argument("LabelledBasis: matter state must conjugate to antimatter");
        }
        break;
      case ParticleKind::Antimatter:
        if (kinds[static_cast<std::size_t>(kb)] != ParticleKind::Matter) {
          throw std::invalid_argument("LabelledBasis: antimatter state must conjugate to matter");
        }
        break;
    }
  }
}

int LabelledBasis::index_of(const std::string& label) const {
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == label) return static_cast<int>(k);
  }
  throw std::invalid_argument("LabelledBasis: no state labelled '" + label + "'");
}

LabelledBasis LabelledBasis::from_labels(const std::vector<std::string>& labels) {
  LabelledBasis b;
  b.labels = labels;
  b.kinds.resize(labels.size(), ParticleKind::Neutral);
  b.conjugate.resize(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) b.conjugate[k] = static_cast<int>(k);

  for (std::size_t k = 0; k < labels.size(); ++k) {
    const std::string& name = labels[k];
    if (name.size() > 3 && name.substr(name.size() - 3) == "bar") {
      const std::string base = name.substr(0, name.size() - 3);
      for (std::size_t j = 0; j < labels.size(); ++j) {
        if (labels[j] == base) {
          b.kinds[k] = ParticleKind::Antimatter;
          b.kinds[j] = ParticleKind::Matter;
          b.conjugate[k] = static_cast<int>(j);
          b.conjugate[j] = static_cast<int>(k);
        }
      }
    }
  }
  b.validate();
  return b;
}

ComplexMatrix apply_transform(const LabelledBasis& basis, TransformKind kind,
                              const ComplexMatrix& x) {
  basis.validate();
  const int n = basis.dim();
  if (x.rows() != n || x.cols() != n) {
    throw std::invalid_argument("apply_transform: matrix does not match basis dimension");
  }
  ComplexMatrix out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Complex v = x(basis.conjugate[static_cast<std::size_t>(i)],
                          basis.conjugate[static_cast<std::size_t>(j)]);
      out(i, j) = (kind == TransformKind::CPT) ? std::conj(v) : v;
    }
  }
  return out;
}

std::vector<DephasingChannel> ChannelFamily::as_operators() const {
  basis.validate();
  std::vector<DephasingChannel> out;
  out.reserve(channels.size());
  for (const auto& ch : channels) {
    if (ch.amplitudes.size() != basis.dim()) {
      throw std::invalid_argument("ChannelFamily: amplitude vector does not match basis");
    }
    ComplexMatrix op = ComplexMatrix::Zero(basis.dim(), basis.dim());
    op.diagonal() = ch.amplitudes.cast<Complex>();
    out.push_back({std::move(op), ch.gamma});
  }
  return out;
}

RealMatrix ChannelFamily::rate_matrix() const {
  basis.validate();
  const int n = basis.dim();
  RealMatrix rates = RealMatrix::Zero(n, n);
  for (const auto& ch : channels) {
    if (ch.amplitudes.size() != n) {
      throw std::invalid_argument("ChannelFamily: amplitude vector does not match basis");
    }
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        const double d = ch.amplitudes(k) - ch.amplitudes(i);
        rates(k, i) += 0.5 * ch.gamma * d * d;
      }
    }
  }
  return rates;
}

namespace {

RealVector conjugated_amplitudes(const LabelledBasis& basis, const RealVector& a) {
  RealVector out(a.size());
  for (int k = 0; k < a.size(); ++k) out(k) = a(basis.conjugate[static_cast<std::size_t>(k)]);
  return out;
}

double matter_weight(const LabelledBasis& basis, const RealVector& a, ParticleKind kind) {
  double w = 0.0;
  for (int k = 0; k < a.size(); ++k) {
    if (basis.kinds[static_cast<std::size_t>(k)] == kind) w += a(k) * a(k);
  }
  return w;
}

}  // namespace

SymmetryVerdict check_generator_symmetry(TransformKind kind, const ComplexMatrix& hamiltonian,
                                         const ChannelFamily& family, double amp_tol,
                                         double gamma_tol) {
  family.basis.validate();
  SymmetryVerdict verdict;
  verdict.hamiltonian_residual =
      (apply_transform(family.basis, kind, hamiltonian) - hamiltonian).cwiseAbs().maxCoeff();
  bool all_ok = verdict.hamiltonian_residual <= amp_tol * std::max(1.0, hamiltonian.norm());
  if (!all_ok) verdict.messages.push_back("Hamiltonian is not invariant under the transform");

  const auto& chs = family.channels;
  for (std::size_t j = 0; j < chs.size(); ++j) {
    const RealVector conj_a = conjugated_amplitudes(family.basis, chs[j].amplitudes);
    int partner = -1;
    for (std::size_t l = 0; l < chs.size(); ++l) {
      if ((chs[l].amplitudes - conj_a).cwiseAbs().maxCoeff() <= amp_tol) {
        partner = static_cast<int>(l);
        break;
      }
    }
    if (partner < 0) {
      throw std::invalid_argument("check_generator_symmetry: channel " + std::to_string(j) +
                                  " has no conjugate partner in the family");
    }
    SymmetryVerdict::ChannelCheck cc;
    cc.channel = static_cast<int>(j);
    cc.partner = partner;
    cc.gamma = chs[j].gamma;
    cc.partner_gamma = chs[static_cast<std::size_t>(partner)].gamma;
    cc.residual = (kind == TransformKind::CP) ? std::abs(cc.gamma - cc.partner_gamma)
                                              : std::abs(cc.gamma + cc.partner_gamma);
    cc.ok = cc.residual <= gamma_tol;
    if (!cc.ok) {
      verdict.messages.push_back(
          "channel " + std::to_string(j) + " violates the " +
          (kind == TransformKind::CP ? std::string("CP rule gamma_j = gamma_jbar")
                                     : std::string("CPT rule gamma_j = -gamma_jbar")) +
          " (residual " + std::to_string(cc.residual) + ")");
    }
    all_ok = all_ok && cc.ok;
    verdict.channels.push_back(cc);
  }
  verdict.pass = all_ok;
  return verdict;
}

ChannelFamily build_constrained_family(const LabelledBasis& basis, TransformKind kind,
                                       std::uint64_t seed, int n_draws) {
  basis.validate();
  ChannelFamily family;
  family.basis = basis;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> rate(0.1, 1.0);

  for (int d = 0; d < n_draws; ++d) {
    RealVector a(basis.dim());
    for (int k = 0; k < basis.dim(); ++k) a(k) = amp(rng);
    const double g = rate(rng);
    const RealVector abar = conjugated_amplitudes(basis, a);

    if ((abar - a).cwiseAbs().maxCoeff() == 0.0) {
      // Self-conjugate draw: CP allows any rate, CPT forces gamma = 0.
      family.channels.push_back({a, kind == TransformKind::CP ? g : 0.0});
      continue;
    }
    if (kind == TransformKind::CP) {
      family.channels.push_back({a, g});
      family.channels.push_back({abar, g});
    } else {
      // Anchor the non-negative rate on the matter-weighted member.
      const bool a_is_matter_side = matter_weight(basis, a, ParticleKind::Matter) >=
                                    matter_weight(basis, a, ParticleKind::Antimatter);
      family.channels.push_back({a, a_is_matter_side ? g : -g});
      family.channels.push_back({abar, a_is_matter_side ? -g : g});
    }
  }
  return family;
}

TotalRateSplit total_rate_split(const ChannelFamily& stochastic, const ChannelFamily& bath,
                                int q_index, int o_index) {
  stochastic.basis.validate();
  for (const auto& ch : bath.channels) {
    if (ch.gamma < 0.0) {
      throw std::invalid_argument("total_rate_split: bath rates must be >= 0");
    }
  }
  const int qbar = stochastic.basis.conjugate[static_cast<std::size_t>(q_index)];
  const RealMatrix gs = stochastic.rate_matrix();
  const RealMatrix gb = bath.rate_matrix();

  TotalRateSplit out;
  out.stochastic = gs(q_index, o_index);
  out.bath = gb(q_index, o_index);
  out.matter_total = gs(q_index, o_index) + gb(q_index, o_index);
  out.antimatter_total = gs(qbar, o_index) + gb(qbar, o_index);
  out.negative_total_flag = out.antimatter_total < 0.0 || out.matter_total < 0.0;
  return out;
}

double phi_factor(double gamma_bath, double gamma_stochastic) {
  const double denom = gamma_bath + gamma_stochastic;
  if (denom == 0.0) throw std::invalid_argument("phi_factor: zero denominator");
  return (gamma_bath - gamma_stochastic) / denom;
}

BlockDiagonalityReport block_diagonality_check(const ComplexMatrix& hamiltonian,
                                               const std::vector<ComplexMatrix>& ops,
                                               double rel_gap, double element_tol) {
  if (!is_hermitian(hamiltonian)) {
    throw std::invalid_argument("block_diagonality_check: Hamiltonian is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hamiltonian);
  const RealVector evals = es.eigenvalues();
  const ComplexMatrix vecs = es.eigenvectors();
  const double gap_threshold = rel_gap * std::max(hamiltonian.norm(), 1e-300);

  BlockDiagonalityReport rep;
  rep.eigenvalues.assign(evals.data(), evals.data() + evals.size());
  rep.cluster_of.resize(static_cast<std::size_t>(evals.size()));
  int cluster = 0;
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (i > 0 && evals(i) - evals(i - 1) > gap_threshold) ++cluster;
    rep.cluster_of[static_cast<std::size_t>(i)] = cluster;
  }
  rep.n_clusters = cluster + 1;

  for (const auto& op : ops) {
    BlockDiagonalityReport::OperatorCheck oc;
    oc.commutator_norm = commutator(hamiltonian, op).norm();
    oc.commutes = oc.commutator_norm < element_tol;
    const ComplexMatrix in_eigenbasis = vecs.adjoint() * op * vecs;
    for (Eigen::Index i = 0; i < evals.size(); ++i) {
      for (Eigen::Index k = 0; k < evals.size(); ++k) {
        if (rep.cluster_of[static_cast<std::size_t>(i)] !=
            rep.cluster_of[static_cast<std::size_t>(k)]) {
          oc.max_off_block = std::max(oc.max_off_block, std::abs(in_eigenbasis(i, k)));
        }
      }
    }
    oc.block_diagonal = oc.max_off_block < element_tol;
    rep.operators.push_back(oc);
  }
  return rep;
}

nlohmann::json SymmetryVerdict::to_json() const {
  nlohmann::json j;
  j["pass"] = pass;
  j["hamiltonian_residual"] = hamiltonian_residual;
  j["channels"] = nlohmann::json::array();
  for (const auto& cc : channels) {
    j["channels"].push_back({{"channel", cc.channel},
                             {"partner", cc.partner},
                             {"gamma", cc.gamma},
                             {"partner_gamma", cc.partner_gamma},
                             {"residual", cc.residual},
                             {"ok", cc.ok}});
  }
  j["messages"] = messages;
  return j;
}

}  // namespace decolab::symmetry

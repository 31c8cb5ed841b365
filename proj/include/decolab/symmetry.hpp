#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "decolab/lindblad.hpp"
#include "decolab/qcore.hpp"

#include <json.hpp>

// CP / CPT transformation machinery on finite labelled bases and the
// constraints they impose on dephasing rates.
//
// CP acts as a unitary permutation of basis states (matter <-> antimatter,
// neutral states fixed); CPT additionally conjugates scalars (antiunitary).
// For diagonal channel families with the conjugate pairing
// a_jbar^k = a_j^kbar this forces
//
//   CP:  gamma_j =  gamma_jbar   =>  Gamma_ki =  Gamma_kbar_ibar
//   CPT: gamma_j = -gamma_jbar   =>  Gamma_ki = -Gamma_kbar_ibar
//
// so self-conjugate (neutral-anchored) channels must carry gamma = 0 under
// CPT, and neutral-neutral stochastic rates vanish identically. Bath rates
// are conjugation-even either way, which splits the totals as
// Gamma^tot_po = Gamma^B + Gamma vs Gamma^tot_pbar_o = Gamma^B -+ Gamma
// and motivates the decoherence factor phi = (Gamma^B - Gamma)/(Gamma^B + Gamma).

namespace decolab::symmetry {

enum class ParticleKind { Matter, Antimatter, Neutral };

struct LabelledBasis {
  std::vector<std::string> labels;
  std::vector<ParticleKind> kinds;
  std::vector<int> conjugate;  // index involution k -> kbar

  int dim() const { return static_cast<int>(labels.size()); }
  /// Involution, neutral fixed points, matter <-> antimatter consistency.
  void validate() const;
  int index_of(const std::string& label) const;

  /// Convention: "x" matter, "xbar" antimatter (conjugates of each other),
  /// anything else neutral and self-conjugate.
  static LabelledBasis from_labels(const std::vector<std::string>& labels);
};

enum class TransformKind { CP, CPT };

/// S X S^-1 on the labelled basis: CP permutes rows and columns by the
/// conjugation involution; CPT permutes and entrywise conjugates.
ComplexMatrix apply_transform(const LabelledBasis& basis, TransformKind kind,
                              const ComplexMatrix& x);

/// Diagonal dephasing channel over a labelled basis: real amplitudes a^k
/// plus a signed rate.
struct DiagonalChannel {
  RealVector amplitudes;
  double gamma = 0.0;
};

struct ChannelFamily {
  LabelledBasis basis;
  std::vector<DiagonalChannel> channels;

  std::vector<DephasingChannel> as_operators() const;
  /// Gamma_ki = (1/2) sum_j gamma_j (a_j^k - a_j^i)^2.
  RealMatrix rate_matrix() const;
};

struct SymmetryVerdict {
  bool pass = false;
  double hamiltonian_residual = 0.0;  // max |S(H) - H|
  struct ChannelCheck {
    int channel = -1;
    int partner = -1;  // == channel for self-conjugate
    double gamma = 0.0;
    double partner_gamma = 0.0;
    double residual = 0.0;  // |gamma_j -+ gamma_jbar| per the transform kind
    bool ok = false;
  };
  std::vector<ChannelCheck> channels;
  std::vector<std::string> messages;

  nlohmann::json to_json() const;
};

/// Verifies S(H) = H and the gamma pairing rule for the transform kind.
/// Throws if some channel has no conjugate partner in the family.
SymmetryVerdict check_generator_symmetry(TransformKind kind, const ComplexMatrix& hamiltonian,
                                         const ChannelFamily& family, double amp_tol = 1e-12,
                                         double gamma_tol = 1e-12);

/// Random family satisfying the pairing exactly by construction. Under CPT
/// the non-negative rate of each pair is anchored on the matter-weighted
/// side and self-conjugate draws are forced to gamma = 0.
ChannelFamily build_constrained_family(const LabelledBasis& basis, TransformKind kind,
                                       std::uint64_t seed, int n_draws = 4);

struct TotalRateSplit {
  double matter_total = 0.0;      // Gamma^tot(q, o)
  double antimatter_total = 0.0;  // Gamma^tot(qbar, o)
  double stochastic = 0.0;        // Gamma(q, o)
  double bath = 0.0;              // Gamma^B(q, o)
  bool negative_total_flag = false;
};

/// Reads the (q, o) and (qbar, o) entries of the combined rate matrices.
/// Bath rates must be built from non-negative gammas.
TotalRateSplit total_rate_split(const ChannelFamily& stochastic, const ChannelFamily& bath,
                                int q_index, int o_index);

/// phi = (Gamma^B - Gamma)/(Gamma^B + Gamma) <= 1; throws on zero denominator.
double phi_factor(double gamma_bath, double gamma_stochastic);

struct BlockDiagonalityReport {
  std::vector<double> eigenvalues;       // ascending
  std::vector<int> cluster_of;           // degenerate-cluster id per eigenvector
  int n_clusters = 0;
  struct OperatorCheck {
    double commutator_norm = 0.0;  // ||[H, L]||_F
    bool commutes = false;
    double max_off_block = 0.0;  // largest |<i|L|k>| between distinct clusters
    bool block_diagonal = false;
  };
  std::vector<OperatorCheck> operators;
};

/// Eigendecomposes H (gap threshold rel_gap * ||H||_F for degeneracy) and
/// measures the off-block matrix elements of each operator.
BlockDiagonalityReport block_diagonality_check(const ComplexMatrix& hamiltonian,
                                               const std::vector<ComplexMatrix>& ops,
                                               double rel_gap = 1e-8, double element_tol = 1e-9);

}  // namespace decolab::symmetry

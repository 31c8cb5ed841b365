#include "decolab/diffract.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace decolab::diffract {

ReactionClass reaction_class_from_string(const std::string& s) {
  if (s.size() == 1) {
    const char c = s[0];
    if (c >= 'A' && c <= 'G') return static_cast<ReactionClass>(c - 'A');
    if (c >= 'a' && c <= 'g') return static_cast<ReactionClass>(c - 'a');
  }
  throw std::invalid_argument("unknown reaction class '" + s + "' (expected A..G)");
}

std::string to_string(ReactionClass c) {
  return std::string(1, static_cast<char>('A' + static_cast<int>(c)));
}

DiffractionKind kind_of(ReactionClass c) {
  return static_cast<int>(c) <= static_cast<int>(ReactionClass::D) ? DiffractionKind::SD
                                                                   : DiffractionKind::DD;
}

int k_exponent(ReactionClass c) {
  const int i = static_cast<int>(c);
  return kind_of(c) == DiffractionKind::SD ? i : i - static_cast<int>(ReactionClass::E);
}

double CrossSectionPoint::combined_error() const {
  auto rms = [](double a, double b) { return std::sqrt(a * a + b * b); };
  if (err_lo || err_hi) {
    const double up = rms(err_stat, err_hi.value_or(err_syst));
    const double down = rms(err_stat, err_lo.value_or(err_syst));
    return 0.5 * (up + down);
  }
  return rms(err_stat, err_syst);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (const char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, int row, const char* field) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing garbage");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("dataset row " + std::to_string(row) + ": bad value for " + field +
                             " ('" + s + "')");
  }
}

}  // namespace

std::vector<CrossSectionPoint> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open '" + path + "'");

  std::vector<CrossSectionPoint> points;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    if (row == 1 || stripped.rfind("experiment,", 0) == 0) continue;  // header

    const auto f = split_csv_line(stripped);
    if (f.size() != 11) {
      throw std::runtime_error("dataset row " + std::to_string(row) + ": expected 11 fields, got " +
                               std::to_string(f.size()));
    }
    CrossSectionPoint p;
    p.experiment = trim(f[0]);
    const std::string kind = trim(f[1]);
    if (kind == "SD") {
      p.kind = DiffractionKind::SD;
    } else if (kind == "DD") {
      p.kind = DiffractionKind::DD;
    } else {
      throw std::runtime_error("dataset row " + std::to_string(row) + ": kind must be SD or DD");
    }
    try {
      p.reaction = reaction_class_from_string(trim(f[2]));
    } catch (const std::exception& e) {
      throw std::runtime_error("dataset row " + std::to_string(row) + ": " + e.what());
    }
    if (kind_of(p.reaction) != p.kind) {
      throw std::runtime_error("dataset row " + std::to_string(row) + ": class " +
                               to_string(p.reaction) + " does not belong to kind " + kind);
    }
    p.sqrt_s = parse_double(trim(f[3]), row, "sqrt_s_gev");
    p.value = parse_double(trim(f[4]), row, "value_mb");
    p.err_stat = parse_double(trim(f[5]), row, "err_stat");
    p.err_syst = parse_double(trim(f[6]), row, "err_syst");
    if (!trim(f[7]).empty()) p.err_lo = parse_double(trim(f[7]), row, "err_lo");
    if (!trim(f[8]).empty()) p.err_hi = parse_double(trim(f[8]), row, "err_hi");
    const std::string inc = trim(f[9]);
    if (inc == "true" || inc == "1") {
      p.include = true;
    } else if (inc == "false" || inc == "0") {
      p.include = false;
    } else {
      throw std::runtime_error("dataset row " + std::to_string(row) + ": include must be boolean");
    }
    p.note = trim(f[10]);

    if (!(p.sqrt_s > 0.0)) {
      throw std::runtime_error("dataset row " + std::to_string(row) + ": sqrt_s must be > 0");
    }
    if (!(p.value > 0.0)) {
      throw std::runtime_error("dataset row " + std::to_string(row) + ": value must be > 0");
    }
    if (p.err_stat < 0.0 || p.err_syst < 0.0 || p.err_lo.value_or(0.0) < 0.0 ||
        p.err_hi.value_or(0.0) < 0.0) {
      throw std::runtime_error("dataset row " + std::to_string(row) + ": errors must be >= 0");
    }
    points.push_back(std::move(p));
  }
  return points;
}

std::string FitModel::name() const {
  switch (kind) {
    case ModelKind::SDF1: return "SDF1";
    case ModelKind::SDC1: return "SDC1";
    case ModelKind::SDF1s: return "SDF1s";
    case ModelKind::SDF2: return "SDF2";
    case ModelKind::SDCln: return "SDCln";
    case ModelKind::SDC4: return "SDC4";
    case ModelKind::SDF1w1: return "SDF1w1";
    case ModelKind::SDC1w1: return "SDC1w1";
    case ModelKind::DDF1: return "DDF1";
    case ModelKind::DDF2: return "DDF2";
    case ModelKind::DDC1: return "DDC1";
  }
  return "?";
}

DiffractionKind FitModel::data_kind() const {
  switch (kind) {
    case ModelKind::DDF1:
    case ModelKind::DDF2:
    case ModelKind::DDC1: return DiffractionKind::DD;
    default: return DiffractionKind::SD;
  }
}

Weighting FitModel::default_weighting() const {
  return (kind == ModelKind::SDF1w1 || kind == ModelKind::SDC1w1) ? Weighting::Unit
                                                                  : Weighting::InverseVariance;
}

bool FitModel::has_phi() const {
  switch (kind) {
    case ModelKind::SDF1:
    case ModelKind::SDF1w1:
    case ModelKind::DDF1:
    case ModelKind::DDF2: return true;
    default: return false;
  }
}

std::vector<std::string> FitModel::parameter_names() const {
  switch (kind) {
    case ModelKind::SDF1:
    case ModelKind::SDF1w1: return {"sigma0", "phi", "epsilon"};
    case ModelKind::SDC1:
    case ModelKind::SDC1w1: return {"sigma0", "epsilon"};
    case ModelKind::SDF1s: return {"sigma0", "phi0", "epsilon", "kappa"};
    case ModelKind::SDF2: return {"sigma0", "epsilon", "phi1", "phi2"};
    case ModelKind::SDCln: return {"sigma0", "sigma1"};
    case ModelKind::SDC4: return {"sigma0", "c0", "c1", "c2", "c3"};
    case ModelKind::DDF1:
    case ModelKind::DDF2: return {"sigma2", "phi", "epsilon2"};
    case ModelKind::DDC1: return {"sigma2", "epsilon2"};
  }
  return {};
}

int FitModel::parameter_count() const {
  // DDF1 always freezes phi, so it has one fewer free parameter.
  const int full = static_cast<int>(parameter_names().size());
  return kind == ModelKind::DDF1 ? full - 1 : full;
}

FitModel FitModel::from_name(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  static const std::pair<const char*, ModelKind> table[] = {
      {"sdf1", ModelKind::SDF1},     {"sdc1", ModelKind::SDC1},   {"sdf1s", ModelKind::SDF1s},
      {"sdf2", ModelKind::SDF2},     {"sdcln", ModelKind::SDCln}, {"sdc4", ModelKind::SDC4},
      {"sdf1w1", ModelKind::SDF1w1}, {"sdc1w1", ModelKind::SDC1w1}, {"ddf1", ModelKind::DDF1},
      {"ddf2", ModelKind::DDF2},     {"ddc1", ModelKind::DDC1}};
  for (const auto& [n, k] : table) {
    if (lower == n) return FitModel{k};
  }
  throw std::invalid_argument("unknown fit model '" + name + "'");
}

std::vector<std::string> FitModel::known_names() {
  return {"sdf1", "sdc1", "sdf1s", "sdf2", "sdcln", "sdc4", "sdf1w1", "sdc1w1",
          "ddf1", "ddf2", "ddc1"};
}

double model_predict(const FitModel& m, const std::vector<double>& params,
                     const CrossSectionPoint& p) {
  if (params.size() != m.parameter_names().size()) {
    throw std::invalid_argument("model_predict: expected " +
                                std::to_string(m.parameter_names().size()) + " parameters for " +
                                m.name());
  }
  if (kind_of(p.reaction) != m.data_kind()) {
    throw std::invalid_argument("model_predict: point class " + to_string(p.reaction) +
                                " does not match model " + m.name());
  }
  const double s = p.s();
  const double ls = std::log(s);
  const int k = p.k();
  switch (m.kind) {
    case ModelKind::SDF1:
    case ModelKind::SDF1w1:
      return params[0] * std::pow(params[1], 2.0 * k) * std::pow(s, params[2]);
    case ModelKind::SDC1:
    case ModelKind::SDC1w1:
      return params[0] * std::pow(s, params[1]);
    case ModelKind::SDF1s: {
      const double phi_s = params[1] * std::pow(s, params[3]);
      return params[0] * std::pow(phi_s, 2.0 * k) * std::pow(s, params[2]);
    }
    case ModelKind::SDF2: {
      double suppression = 1.0;
      if (k >= 1) suppression *= params[2] * params[2];
      if (k >= 2) suppression *= params[3] * params[3];
      return params[0] * std::pow(s, params[1]) * suppression;
    }
    case ModelKind::SDCln:
      return params[0] + params[1] * ls;
    case ModelKind::SDC4: {
      const double eps = params[1] + params[2] * ls + params[3] * ls * ls +
                         params[4] * ls * ls * ls;
      return params[0] * std::exp(eps * ls);
    }
    case ModelKind::DDF1:
    case ModelKind::DDF2:
      return params[0] * std::pow(params[1], 4.0 * k) * std::pow(s, params[2]);
    case ModelKind::DDC1:
      return params[0] * std::pow(s, params[1]);
  }
  throw std::logic_error("model_predict: unhandled model");
}

namespace {

// Internal linear parameterisation of one fit: response y_i = row_i . theta
// (+ a fixed offset already subtracted), with the map back to natural
// parameters.
struct Design {
  bool log_space = true;                // response is ln(value)
  std::vector<std::string> free_names;  // natural names of the fitted thetas
  std::vector<bool> is_log;             // natural = exp(theta)?
  std::vector<RealVector> rows;
  std::vector<double> response;

  int p() const { return static_cast<int>(free_names.size()); }
};

Design build_design(const FitModel& m, const std::vector<const CrossSectionPoint*>& pts,
                    const std::optional<double>& freeze_phi) {
  Design d;
  const bool frozen = freeze_phi.has_value();
  if (frozen && !m.has_phi()) {
    throw std::invalid_argument("fit: model " + m.name() + " has no phi to freeze");
  }
  if (m.kind == ModelKind::DDF1 && !frozen) {
    throw std::invalid_argument("fit: DDF1 requires a frozen phi (pass the SD-fit value)");
  }
  if (frozen && !(*freeze_phi > 0.0)) {
    throw std::invalid_argument("fit: frozen phi must be > 0");
  }

  for (const CrossSectionPoint* p : pts) {
    const double ls = std::log(p->s());
    const double k = p->k();
    RealVector row;
    double y = std::log(p->value);
    switch (m.kind) {
      case ModelKind::SDF1:
      case ModelKind::SDF1w1:
        if (frozen) {
          row.resize(2);
          row << 1.0, ls;
          y -= 2.0 * k * std::log(*freeze_phi);
        } else {
          row.resize(3);
          row << 1.0, 2.0 * k, ls;
        }
        break;
      case ModelKind::SDC1:
      case ModelKind::SDC1w1:
        row.resize(2);
        row << 1.0, ls;
        break;
      case ModelKind::SDF1s:
        row.resize(4);
        row << 1.0, 2.0 * k, ls, 2.0 * k * ls;
        break;
      case ModelKind::SDF2:
        row.resize(4);
        row << 1.0, ls, (k >= 1 ? 2.0 : 0.0), (k >= 2 ? 2.0 : 0.0);
        break;
      case ModelKind::SDCln:
        row.resize(2);
        row << 1.0, ls;
        y = p->value;  // linear mb space
        break;
      case ModelKind::SDC4:
        row.resize(5);
        row << 1.0, ls, ls * ls, ls * ls * ls, ls * ls * ls * ls;
        break;
      case ModelKind::DDF1:
        row.resize(2);
        row << 1.0, ls;
        y -= 4.0 * k * std::log(*freeze_phi);
        break;
      case ModelKind::DDF2:
        if (frozen) {
          row.resize(2);
          row << 1.0, ls;
          y -= 4.0 * k * std::log(*freeze_phi);
        } else {
          row.resize(3);
          row << 1.0, ls, 4.0 * k;
        }
        break;
      case ModelKind::DDC1:
        row.resize(2);
        row << 1.0, ls;
        break;
    }
    d.rows.push_back(std::move(row));
    d.response.push_back(y);
  }

  switch (m.kind) {
    case ModelKind::SDF1:
    case ModelKind::SDF1w1:
      d.free_names = frozen ? std::vector<std::string>{"sigma0", "epsilon"}
                            : std::vector<std::string>{"sigma0", "phi", "epsilon"};
      d.is_log = frozen ? std::vector<bool>{true, false} : std::vector<bool>{true, true, false};
      break;
    case ModelKind::SDC1:
    case ModelKind::SDC1w1:
      d.free_names = {"sigma0", "epsilon"};
      d.is_log = {true, false};
      break;
    case ModelKind::SDF1s:
      d.free_names = {"sigma0", "phi0", "epsilon", "kappa"};
      d.is_log = {true, true, false, false};
      break;
    case ModelKind::SDF2:
      d.free_names = {"sigma0", "epsilon", "phi1", "phi2"};
      d.is_log = {true, false, true, true};
      break;
    case ModelKind::SDCln:
      d.log_space = false;
      d.free_names = {"sigma0", "sigma1"};
      d.is_log = {false, false};
      break;
    case ModelKind::SDC4:
      d.free_names = {"sigma0", "c0", "c1", "c2", "c3"};
      d.is_log = {true, false, false, false, false};
      break;
    case ModelKind::DDF1:
      d.free_names = {"sigma2", "epsilon2"};
      d.is_log = {true, false};
      break;
    case ModelKind::DDF2:
      d.free_names = frozen ? std::vector<std::string>{"sigma2", "epsilon2"}
                            : std::vector<std::string>{"sigma2", "epsilon2", "phi"};
      d.is_log = frozen ? std::vector<bool>{true, false} : std::vector<bool>{true, false, true};
      break;
    case ModelKind::DDC1:
      d.free_names = {"sigma2", "epsilon2"};
      d.is_log = {true, false};
      break;
  }
  return d;
}

// Rebuilds the full canonical parameter vector by name (inserting the
// frozen phi where the model expects it) so model_predict can be reused
// everywhere; the free-parameter order need not match the canonical one.
std::vector<double> assemble_naturals(const FitModel& m, const Design& d,
                                      const std::vector<double>& free_values,
                                      const std::optional<double>& frozen_phi) {
  const auto full_names = m.parameter_names();
  std::vector<double> full(full_names.size(), 0.0);
  for (std::size_t i = 0; i < full_names.size(); ++i) {
    bool found = false;
    for (std::size_t j = 0; j < d.free_names.size(); ++j) {
      if (d.free_names[j] == full_names[i]) {
        full[i] = free_values[j];
        found = true;
        break;
      }
    }
    if (!found) {
      if (!frozen_phi) throw std::logic_error("fit: no value for parameter " + full_names[i]);
      full[i] = *frozen_phi;
    }
  }
  return full;
}

}  // namespace

const FitParameter* FitResult::find(const std::string& name) const {
  for (const auto& p : params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::vector<double> FitResult::natural_parameters() const {
  const FitModel m{model};
  const auto full_names = m.parameter_names();
  std::vector<double> full;
  full.reserve(full_names.size());
  for (const auto& name : full_names) {
    if (const FitParameter* p = find(name)) {
      full.push_back(p->value);
    } else if (frozen_phi) {
      full.push_back(*frozen_phi);
    } else {
      throw std::logic_error("FitResult: missing parameter " + name);
    }
  }
  return full;
}

FitResult fit(const FitModel& m, const std::vector<CrossSectionPoint>& data,
              const FitOptions& opts) {
  std::vector<const CrossSectionPoint*> pts;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].include && data[i].kind == m.data_kind()) {
      pts.push_back(&data[i]);
      index.push_back(i);
    }
  }

  const Design d = build_design(m, pts, opts.freeze_phi);
  const int n = static_cast<int>(pts.size());
  const int p = d.p();
  if (n < p) {
    throw std::invalid_argument("fit: " + m.name() + " needs at least " + std::to_string(p) +
                                " included points, got " + std::to_string(n));
  }

  const Weighting weighting = opts.weighting.value_or(m.default_weighting());
  RealVector w(n);
  for (int i = 0; i < n; ++i) {
    const double err = pts[static_cast<std::size_t>(i)]->combined_error();
    if (weighting == Weighting::Unit) {
      w(i) = 1.0;
    } else if (err <= 0.0) {
      throw std::invalid_argument("fit: point " + std::to_string(index[static_cast<std::size_t>(i)]) +
                                  " has zero error; cannot use inverse-variance weights");
    } else if (d.log_space) {
      const double ratio = pts[static_cast<std::size_t>(i)]->value / err;
      w(i) = ratio * ratio;  // inverse variance of ln(sigma)
    } else {
      w(i) = 1.0 / (err * err);
    }
  }

  RealMatrix a(n, p);
  RealVector b(n);
  for (int i = 0; i < n; ++i) {
    const double sw = std::sqrt(w(i));
    a.row(i) = sw * d.rows[static_cast<std::size_t>(i)].transpose();
    b(i) = sw * d.response[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<RealMatrix> qr(a);
  if (qr.rank() < p) {
    throw std::invalid_argument("fit: rank-deficient design for " + m.name() +
                                " (the included classes do not constrain every parameter)");
  }
  const RealVector theta = qr.solve(b);
  const RealMatrix normal = a.transpose() * a;
  const RealMatrix covariance = normal.inverse();

  FitResult res;
  res.model = m.kind;
  res.weighting = weighting;
  res.frozen_phi = opts.freeze_phi;
  res.n = n;
  res.n_f = p;
  res.covariance = covariance;
  res.point_index = index;

  // chi2 and delta_w use the fit's own weights on the log residuals;
  // rescaled errors multiply the naive covariance by sqrt(chi2_w).
  std::vector<double> free_values(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) free_values[static_cast<std::size_t>(j)] = theta(j);

  std::vector<double> naturals(free_values);
  for (int j = 0; j < p; ++j) {
    if (d.is_log[static_cast<std::size_t>(j)]) {
      naturals[static_cast<std::size_t>(j)] = std::exp(theta(j));
    }
  }
  const std::vector<double> full_naturals = assemble_naturals(m, d, naturals, res.frozen_phi);

  double sum_w = 0.0, sum_wr2 = 0.0, sum_sq = 0.0;
  res.predicted.resize(static_cast<std::size_t>(n));
  res.log_residual.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const CrossSectionPoint& pt = *pts[static_cast<std::size_t>(i)];
    const double pred = model_predict(m, full_naturals, pt);
    res.predicted[static_cast<std::size_t>(i)] = pred;
    const double r = std::log(pred / pt.value);
    res.log_residual[static_cast<std::size_t>(i)] = r;
    double wi = w(i);
    if (!d.log_space && weighting != Weighting::Unit) {
      // SDCln is fitted in mb space; delta_w is still reported with the
      // standard log-space weights for comparability.
      const double ratio = pt.value / pt.combined_error();
      wi = ratio * ratio;
    }
    sum_w += wi;
    sum_wr2 += wi * r * r;
    sum_sq += (pred - pt.value) * (pred - pt.value);
  }
  res.delta_w = std::sqrt(sum_wr2 / sum_w);
  res.delta_l2 = std::sqrt(sum_sq / n);
  res.chi2_w = sum_wr2 / std::max(1, n - p);

  // Unit-weight fits take their scale from the residuals themselves; the
  // inverse-variance covariance is already in physical units.
  const double naive_scale = (weighting == Weighting::Unit) ? std::sqrt(res.chi2_w) : 1.0;
  const double rescale = (weighting == Weighting::Unit) ? 1.0 : std::sqrt(res.chi2_w);
  for (int j = 0; j < p; ++j) {
    FitParameter fp;
    fp.name = d.free_names[static_cast<std::size_t>(j)];
    const double theta_err = std::sqrt(std::max(covariance(j, j), 0.0)) * naive_scale;
    fp.value = naturals[static_cast<std::size_t>(j)];
    const double derivative = d.is_log[static_cast<std::size_t>(j)] ? fp.value : 1.0;
    fp.err_naive = derivative * theta_err;
    fp.err_rescaled = fp.err_naive * rescale;
    res.params.push_back(std::move(fp));
  }
  return res;
}

FitResult fit_dd(const FitModel& m, const std::vector<CrossSectionPoint>& data,
                 std::optional<double> phi_frozen) {
  if (m.data_kind() != DiffractionKind::DD) {
    throw std::invalid_argument("fit_dd: " + m.name() + " is not a DD model");
  }
  FitOptions opts;
  opts.freeze_phi = phi_frozen;
  return fit(m, data, opts);
}

E710Estimate e710_direct_phi(double n_left, double n_right, double err_left, double err_right) {
  if (!(n_left > 0.0) || !(n_right > 0.0)) {
    throw std::invalid_argument("e710_direct_phi: counts must be > 0");
  }
  E710Estimate out;
  out.phi = std::sqrt(n_left / n_right);
  out.phi_uncertainty = 0.5 * out.phi *
                        std::sqrt((err_left / n_left) * (err_left / n_left) +
                                  (err_right / n_right) * (err_right / n_right));
  out.delta_n = n_right - n_left;
  out.coin_flip_scale = std::sqrt(n_left + n_right);
  out.bias_significance = out.delta_n / out.coin_flip_scale;
  return out;
}

namespace {

double gaussian_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

Significance significance_from(double phi, double sigma_phi, NullHypothesis null) {
  if (!(sigma_phi > 0.0)) throw std::invalid_argument("significance: sigma_phi must be > 0");
  Significance s;
  s.z = (1.0 - phi) / sigma_phi;
  s.p_one_sided = gaussian_tail(s.z);
  s.p_two_sided = 2.0 * s.p_one_sided;
  s.p = (null == NullHypothesis::PhiGreaterEqualOne) ? s.p_one_sided : s.p_two_sided;
  s.z_rescaled = s.z;
  s.p_rescaled = s.p;
  return s;
}

Significance significance(const FitResult& fit, NullHypothesis null) {
  const FitParameter* phi = fit.find("phi");
  if (phi == nullptr) {
    throw std::invalid_argument("significance: fit carries no phi parameter");
  }
  Significance s = significance_from(phi->value, phi->err_naive, null);
  if (phi->err_rescaled > 0.0) {
    s.z_rescaled = (1.0 - phi->value) / phi->err_rescaled;
    const double tail = gaussian_tail(s.z_rescaled);
    s.p_rescaled = (null == NullHypothesis::PhiGreaterEqualOne) ? tail : 2.0 * tail;
  }
  return s;
}

nlohmann::json FitResult::to_json() const {
  nlohmann::json j;
  j["model"] = FitModel{model}.name();
  j["params"] = nlohmann::json::array();
  for (const auto& p : params) {
    j["params"].push_back({{"name", p.name},
                           {"value", p.value},
                           {"err_naive", p.err_naive},
                           {"err_rescaled", p.err_rescaled}});
  }
  if (frozen_phi) j["frozen_phi"] = *frozen_phi;
  j["weights"] = weighting == Weighting::Unit ? "unit" : "inv";
  j["delta_w"] = delta_w;
  j["delta_L2"] = delta_l2;
  j["chi2_w"] = chi2_w;
  j["n"] = n;
  j["n_f"] = n_f;
  j["points"] = nlohmann::json::array();
  for (std::size_t i = 0; i < point_index.size(); ++i) {
    j["points"].push_back({{"index", point_index[i]},
                           {"predicted", predicted[i]},
                           {"log_residual", log_residual[i]}});
  }
  return j;
}

std::vector<std::string> write_report(const std::vector<FitResult>& results,
                                      const std::vector<CrossSectionPoint>& data,
                                      const std::string& out_dir) {
  if (results.empty()) throw std::invalid_argument("write_report: no fit results");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> files;

  nlohmann::json all = nlohmann::json::array();
  for (const auto& r : results) all.push_back(r.to_json());
  {
    const std::string path = (fs::path(out_dir) / "fit_results.json").string();
    std::ofstream out(path);
    out << all.dump(2) << "\n";
    files.push_back(path);
  }

  {
    const std::string path = (fs::path(out_dir) / "dataset_points.csv").string();
    std::ofstream out(path);
    out << "experiment,kind,class,sqrt_s_gev,value_mb,combined_error_mb,include\n";
    out.precision(10);
    for (const auto& p : data) {
      out << p.experiment << "," << (p.kind == DiffractionKind::SD ? "SD" : "DD") << ","
          << to_string(p.reaction) << "," << p.sqrt_s << "," << p.value << ","
          << p.combined_error() << "," << (p.include ? "true" : "false") << "\n";
    }
    files.push_back(path);
  }

  for (const auto& r : results) {
    const FitModel m{r.model};
    const auto naturals = r.natural_parameters();
    const std::vector<ReactionClass> classes =
        m.data_kind() == DiffractionKind::SD
            ? std::vector<ReactionClass>{ReactionClass::A, ReactionClass::B, ReactionClass::C}
            : std::vector<ReactionClass>{ReactionClass::E, ReactionClass::F};

    const std::string curve_path =
        (fs::path(out_dir) / ("fit_" + m.name() + "_curves.csv")).string();
    std::ofstream curve(curve_path);
    curve << "sqrt_s_gev";
    for (const auto c : classes) curve << ",class_" << to_string(c) << "_mb";
    curve << "\n";
    curve.precision(10);
    const int n_grid = 200;
    for (int i = 0; i <= n_grid; ++i) {
      const double lg = 1.0 + 3.0 * i / n_grid;  // sqrt(s) from 10 to 1e4 GeV
      const double sqrt_s = std::pow(10.0, lg);
      curve << sqrt_s;
      for (const auto c : classes) {
        CrossSectionPoint probe;
        probe.kind = m.data_kind();
        probe.reaction = c;
        probe.sqrt_s = sqrt_s;
        probe.value = 1.0;
        curve << "," << model_predict(m, naturals, probe);
      }
      curve << "\n";
    }
    files.push_back(curve_path);

    const std::string resid_path =
        (fs::path(out_dir) / ("fit_" + m.name() + "_residuals.csv")).string();
    std::ofstream resid(resid_path);
    resid << "experiment,class,sqrt_s_gev,observed_mb,error_mb,predicted_mb,log_residual\n";
    resid.precision(10);
    for (std::size_t i = 0; i < r.point_index.size(); ++i) {
      const auto& p = data[r.point_index[i]];
      resid << p.experiment << "," << to_string(p.reaction) << "," << p.sqrt_s << "," << p.value
            << "," << p.combined_error() << "," << r.predicted[i] << "," << r.log_residual[i]
            << "\n";
    }
    files.push_back(resid_path);
  }
  return files;
}

}  // namespace decolab::diffract

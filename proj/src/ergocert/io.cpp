#include "ergocert/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ergocert/error.hpp"

namespace ergocert::io {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string fmt(const Magnitude& m) {
  if (m.fits_double()) return fmt(m.to_double());
  return m.to_string();
}

std::string fmt(const XReal& x) {
  if (x.fits_double()) return fmt(x.to_double());
  return x.to_string();
}

json to_json(const Magnitude& m) {
  if (m.fits_double()) return m.to_double();
  return m.to_string();
}

json to_json(const XReal& x) {
  if (x.fits_double()) return x.to_double();
  return x.to_string();
}

json to_json(const Certificate& c) {
  json ledger = json::array();
  for (const auto& e : c.ledger) {
    ledger.push_back(
        {{"name", e.name}, {"value", to_json(e.value)}, {"log_value", to_json(e.value.log())},
         {"citation", e.citation}});
  }
  return {{"kappa", to_json(c.kappa)},
          {"log_kappa", to_json(c.kappa.log())},
          {"R", to_json(c.r_big)},
          {"log_R", to_json(c.r_big.log())},
          {"ledger", ledger},
          {"audit", c.audit}};
}

json to_json(const CouplingConstants& c) {
  json out = json::array();
  for (const auto& e : c.entries()) {
    out.push_back({{"name", e.name},
                   {"value", to_json(e.value)},
                   {"log_value", to_json(e.value.log())},
                   {"citation", e.formula}});
  }
  return out;
}

json to_json(const LyapunovReport& r) {
  return {{"gamma", r.gamma},
          {"beta", r.beta},
          {"beta_at", r.beta_at},
          {"x_star", r.x_star},
          {"rho", r.rho},
          {"D", r.d_const},
          {"K", r.k_radius},
          {"K_degenerate", r.k_degenerate},
          {"grid_points", r.grid_points},
          {"grid_violations", r.grid_violations},
          {"worst_x", r.worst_x},
          {"worst_margin", r.worst_margin}};
}

json to_json(const MinorizationReport& r) {
  return {{"K", r.k_radius},
          {"k", r.k_f},
          {"C", {r.c_lo, r.c_hi}},
          {"v1", r.v1},
          {"v2", r.v2},
          {"v3", r.v3},
          {"sup_abs_s_tilde", r.s_tilde_sup},
          {"delta_K", to_json(r.delta_k)},
          {"log_delta_K", to_json(r.delta_k.log())},
          {"delta", to_json(r.delta)},
          {"notes", r.notes}};
}

json to_json(const DiffusionCertificate& d) {
  return {{"lyapunov", to_json(d.lyapunov)},
          {"minorization", to_json(d.minorization)},
          {"V_star", d.v_star},
          {"epsilon", d.epsilon},
          {"certificate", to_json(d.cert)}};
}

json to_json(const CouplingEstimates& e) {
  auto mean = [](const MeanEstimate& m) {
    return json{{"mean", m.mean}, {"stderr", m.stderr_}, {"log_mean", m.log_mean}};
  };
  return {{"exp_r_sigma1", mean(e.exp_r_sigma1)},
          {"exp_gamma1_varpi", mean(e.exp_gamma1_varpi)},
          {"tail_tau", e.tail_tau},
          {"sigma1_freq", e.sigma1_freq},
          {"n_paths", e.n_paths},
          {"censored", e.censored},
          {"seed", e.seed},
          {"r", e.r},
          {"gamma1", e.gamma1},
          {"warning", e.warning}};
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

namespace {

template <class T>
T get(const json& j, const char* key, const char* what) {
  if (!j.contains(key)) throw InvalidInput(std::string(what) + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string(what) + ": bad \"" + key + "\": " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const char* what) {
  return j.contains(key) ? get<T>(j, key, what) : fallback;
}

FiniteChain chain_from_rows(const json& rows, std::size_t index) {
  std::vector<std::vector<double>> r;
  try {
    r = rows.get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw InvalidInput("chain " + std::to_string(index) + ": " + e.what());
  }
  try {
    return FiniteChain::from_rows(r);
  } catch (const InvalidInput& e) {
    throw InvalidInput("chain " + std::to_string(index) + ": " + e.what());
  }
}

}  // namespace

Pmf pmf_from_json(const json& j) {
  const char* what = "pmf";
  const std::string kind = get_or<std::string>(j, "kind", "masses", what);
  if (kind == "masses") {
    const auto masses = get<std::vector<double>>(j, "masses", what);
    const auto offset = get_or<std::size_t>(j, "offset", 1, what);
    return Pmf::from_weights(offset, masses);
  }
  if (kind == "geometric") {
    const double q = get<double>(j, "q", what);
    return Pmf::geometric(q, get_or<std::size_t>(j, "n_terms", 2000, what));
  }
  if (kind == "uniform") {
    const auto lo = get<std::size_t>(j, "lo", what);
    const auto hi = get<std::size_t>(j, "hi", what);
    if (lo < 1 || hi < lo) throw InvalidInput("pmf: uniform needs 1 <= lo <= hi");
    return Pmf::from_weights(lo, std::vector<double>(hi - lo + 1, 1.0));
  }
  if (kind == "truncated_geometric") {
    const double q = get<double>(j, "q", what);
    const auto max = get<std::size_t>(j, "max", what);
    if (!(q > 0.0 && q < 1.0) || max < 1) throw InvalidInput("pmf: truncated_geometric needs 0<q<1, max>=1");
    std::vector<double> w(max);
    for (std::size_t k = 1; k <= max; ++k) w[k - 1] = std::pow(1.0 - q, static_cast<double>(k - 1)) * q;
    return Pmf::from_weights(1, w);
  }
  throw InvalidInput("pmf: unknown kind \"" + kind + "\"");
}

FamilySpec family_from_json(const json& j) {
  const char* what = "family";
  FamilySpec out;
  if (j.contains("chains")) {
    if (!j.at("chains").is_array() || j.at("chains").empty()) {
      throw InvalidInput("family: \"chains\" must be a non-empty array");
    }
    for (std::size_t i = 0; i < j.at("chains").size(); ++i) {
      out.chains.push_back(chain_from_rows(j.at("chains").at(i), i));
    }
  } else if (j.contains("transition")) {
    out.chains.push_back(chain_from_rows(j.at("transition"), 0));
  } else {
    throw InvalidInput("family: need \"chains\" or \"transition\"");
  }
  const int n = out.chains.front().n_states();
  if (j.contains("v")) {
    const auto v = get<std::vector<double>>(j, "v", what);
    out.v = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  } else {
    out.v = Eigen::VectorXd::Ones(n);
  }
  if (j.contains("c_set")) {
    out.c_set = get<std::vector<int>>(j, "c_set", what);
  } else {
    for (int i = 0; i < n; ++i) out.c_set.push_back(i);
  }
  return out;
}

DiffusionSpec diffusion_from_json(const json& j) {
  const char* what = "model";
  if (!j.contains("drift") || !j.contains("class")) {
    throw InvalidInput("model: need \"drift\" and \"class\"");
  }
  DiffusionSpec out;
  const json& c = j.at("class");
  out.cls.m_bound = get<double>(c, "M", "class");
  out.cls.a_radius = get<double>(c, "a", "class");
  out.cls.l_param = get<double>(c, "L", "class");
  out.cls.epsilon = get<double>(c, "epsilon", "class");
  out.cls.validate();

  const json& d = j.at("drift");
  const std::string kind = get<std::string>(d, "kind", "drift");
  if (kind == "ou") {
    out.model = DiffusionModel::ou(get_or<double>(d, "theta", 1.0, what),
                                   1.0, get_or<double>(d, "mean", 0.0, what));
  } else if (kind == "piecewise_linear") {
    const auto slopes = get<std::vector<double>>(d, "tail_slopes", "drift");
    if (slopes.size() != 2) throw InvalidInput("drift: tail_slopes needs two entries");
    out.model = DiffusionModel::piecewise_linear(get<std::vector<double>>(d, "knots", "drift"),
                                                 get<std::vector<double>>(d, "values", "drift"),
                                                 slopes[0], slopes[1]);
  } else if (kind == "tabulated") {
    out.model = DiffusionModel::tabulated(get<std::vector<double>>(d, "x", "drift"),
                                          get<std::vector<double>>(d, "s", "drift"),
                                          get<std::vector<double>>(d, "s_dot", "drift"));
  } else {
    throw InvalidInput("drift: unknown kind \"" + kind + "\"");
  }

  if (j.contains("sigma")) {
    const json& s = j.at("sigma");
    const std::string sk = get<std::string>(s, "kind", "sigma");
    if (sk == "constant") {
      out.model.set_constant_sigma(get<double>(s, "value", "sigma"));
    } else if (sk == "tanh") {
      out.model.set_tanh_sigma(get<double>(s, "base", "sigma"), get<double>(s, "amplitude", "sigma"));
    } else {
      throw InvalidInput("sigma: unknown kind \"" + sk + "\"");
    }
  }
  if (j.contains("s_deriv_compact_bound")) {
    out.model.s_deriv_compact_bound = get<double>(j, "s_deriv_compact_bound", what);
  } else if (!out.model.constant_sigma) {
    throw InvalidInput("model: non-constant sigma requires s_deriv_compact_bound");
  }
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw InvalidInput("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw InvalidInput("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

Csv::Csv(std::uint64_t seed, std::vector<std::string> header) : width_(header.size()) {
  out_ = "# seed=" + std::to_string(seed) + "\n";
  row(header);
}

void Csv::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw InvalidInput("csv: row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ += ',';
    out_ += cells[i];
  }
  out_ += '\n';
}

}  // namespace ergocert::io

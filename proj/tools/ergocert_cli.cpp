// ergocert: batch front end for certificates, simulations and verification suites.
//
// Exit codes: 0 every check passed, 1 a check failed, 2 invalid input.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ergocert/chain_cert.hpp"
#include "ergocert/diffusion.hpp"
#include "ergocert/error.hpp"
#include "ergocert/io.hpp"
#include "ergocert/markov_sim.hpp"
#include "ergocert/renewal.hpp"
#include "ergocert/rng.hpp"

namespace fs = std::filesystem;
using namespace ergocert;
using io::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheck = 1;
constexpr int kExitInvalid = 2;

struct RunConfig {
  std::string command;
  std::string input_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  std::optional<long> n_max;
  std::vector<double> r_grid;
  std::string format = "csv";
  std::optional<std::size_t> paths;
};

enum class InputKind { pmf, family, diffusion };

InputKind detect_kind(const json& j) {
  if (!j.is_object()) throw InvalidInput("input must be a JSON object");
  if (j.contains("chains") || j.contains("transition")) return InputKind::family;
  if (j.contains("drift")) return InputKind::diffusion;
  if (j.contains("masses") || j.contains("kind")) return InputKind::pmf;
  throw InvalidInput("cannot tell the input kind: expected chains/transition, drift, or a pmf");
}

// Rows of numbers or strings, written as CSV or as {"seed", "columns", "rows"} JSON.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<json> row) {
    if (row.size() != header_.size()) throw std::logic_error("table row width mismatch");
    rows_.push_back(std::move(row));
  }
  std::string render(const std::string& format, std::uint64_t seed) const {
    if (format == "json") {
      json out = {{"seed", seed}, {"columns", header_}, {"rows", rows_}};
      return out.dump(2) + "\n";
    }
    io::Csv csv(seed, header_);
    for (const auto& r : rows_) {
      std::vector<std::string> cells;
      cells.reserve(r.size());
      for (const auto& c : r) cells.push_back(cell(c));
      csv.row(cells);
    }
    return csv.str();
  }

 private:
  static std::string cell(const json& c) {
    if (c.is_boolean()) return c.get<bool>() ? "1" : "0";
    if (c.is_number_integer()) return std::to_string(c.get<long long>());
    if (c.is_number_unsigned()) return std::to_string(c.get<unsigned long long>());
    if (c.is_number()) return io::fmt(c.get<double>());
    if (c.is_string()) return c.get<std::string>();
    return c.dump();
  }

  std::vector<std::string> header_;
  std::vector<std::vector<json>> rows_;
};

class Runner {
 public:
  explicit Runner(RunConfig cfg) : cfg_(std::move(cfg)) {}

  int run() {
    const json input = io::read_json(cfg_.input_path);
    const InputKind kind = detect_kind(input);
    prepare_output();
    const std::string& c = cfg_.command;
    bool ok = true;
    if (c == "renewal") {
      ok = renewal(require_pmf(input, kind));
    } else if (c == "certify-chain") {
      ok = certify_chain(require_family(input, kind));
    } else if (c == "certify-diffusion") {
      ok = certify_diffusion_cmd(require_diffusion(input, kind));
    } else if (c == "simulate") {
      switch (kind) {
        case InputKind::pmf: ok = simulate_pmf(io::pmf_from_json(input)); break;
        case InputKind::family: ok = simulate_family(io::family_from_json(input)); break;
        case InputKind::diffusion: ok = simulate_diffusion(io::diffusion_from_json(input)); break;
      }
    } else if (c == "verify") {
      switch (kind) {
        case InputKind::pmf: ok = verify_pmf(io::pmf_from_json(input)); break;
        case InputKind::family: ok = verify_family(io::family_from_json(input)); break;
        case InputKind::diffusion: ok = verify_diffusion(io::diffusion_from_json(input)); break;
      }
    }
    return ok ? kExitPass : kExitCheck;
  }

 private:
  static Pmf require_pmf(const json& j, InputKind k) {
    if (k != InputKind::pmf) throw InvalidInput("renewal expects a pmf input");
    return io::pmf_from_json(j);
  }
  static io::FamilySpec require_family(const json& j, InputKind k) {
    if (k != InputKind::family) throw InvalidInput("certify-chain expects a chain family input");
    return io::family_from_json(j);
  }
  static io::DiffusionSpec require_diffusion(const json& j, InputKind k) {
    if (k != InputKind::diffusion) throw InvalidInput("certify-diffusion expects a diffusion input");
    return io::diffusion_from_json(j);
  }

  void prepare_output() {
    std::error_code ec;
    fs::create_directories(cfg_.output_dir, ec);
    if (ec || !fs::is_directory(cfg_.output_dir)) {
      throw InvalidInput("output directory " + cfg_.output_dir + " is not writable");
    }
  }

  std::string path(const std::string& name) const { return (fs::path(cfg_.output_dir) / name).string(); }
  std::string ext() const { return cfg_.format == "json" ? ".json" : ".csv"; }

  void write_table(const std::string& stem, const Table& t) const {
    io::write_atomic(path(stem + ext()), t.render(cfg_.format, cfg_.seed));
  }
  void write_json(const std::string& name, json j) const {
    j["seed"] = cfg_.seed;
    io::write_atomic(path(name), j.dump(2) + "\n");
  }

  long n_max_or(long fallback) const {
    const long n = cfg_.n_max.value_or(fallback);
    if (n < 0) throw InvalidInput("--n-max must be non-negative");
    return n;
  }

  std::vector<double> rates() const {
    if (!cfg_.r_grid.empty()) {
      for (double r : cfg_.r_grid) {
        if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("--r-grid entries must be positive");
      }
      return cfg_.r_grid;
    }
    return log_grid(0.01, 2.0, 9);
  }

  static json bound_json(const XReal& log_bound) {
    return io::to_json(Magnitude::from_log(log_bound));
  }

  // u(n), the bound curve and the constants ledger at the best rate on the grid.
  struct RenewalResult {
    std::vector<double> u;
    RateChoice choice;
    double inv_mean = 0.0;
    long violations = 0;
  };

  RenewalResult renewal_tables(const Pmf& p, long n_max) const {
    RenewalResult res;
    res.u = renewal_sequence(p, static_cast<std::size_t>(n_max));
    res.choice = best_rate(p, rates());
    res.inv_mean = 1.0 / p.mean();

    Table seq({"n", "u"});
    Table curve({"n", "abs_deviation", "log_bound", "bound", "dominated"});
    for (long n = 0; n <= n_max; ++n) {
      const double u = res.u[static_cast<std::size_t>(n)];
      seq.add({n, u});
      const double dev = std::fabs(u - res.inv_mean);
      const double lb = res.choice.bound.log_bound(static_cast<double>(n));
      const bool dom = res.choice.bound.dominates(dev, static_cast<double>(n));
      if (n >= 1 && !dom) ++res.violations;
      curve.add({n, dev, lb, bound_json(XReal(lb)), dom});
    }
    write_table("renewal_u", seq);
    write_table("bound_curve", curve);

    json ledger = {{"r", res.choice.r},
                   {"r_grid", rates()},
                   {"kappa", io::to_json(res.choice.bound.kappa)},
                   {"M_star", io::to_json(res.choice.bound.m_star)},
                   {"log_M_star", io::to_json(res.choice.bound.m_star.log())},
                   {"inverse_mean", res.inv_mean},
                   {"constants", io::to_json(res.choice.bound.constants)}};
    write_json("ledger.json", ledger);
    return res;
  }

  bool renewal(const Pmf& p) {
    const auto res = renewal_tables(p, n_max_or(200));
    return res.violations == 0;
  }

  bool certify_chain(const io::FamilySpec& fam) {
    const H1H2 h = verify_h1_h2(fam.chains, fam.v, fam.c_set);
    const Certificate cert = certificate_assemble(h.drift, h.minor);
    write_json("certificate.json", chain_json(h, cert));
    return true;
  }

  static json chain_json(const H1H2& h, const Certificate& cert) {
    std::vector<double> nu(h.nu.data(), h.nu.data() + h.nu.size());
    return {{"drift", {{"rho", h.drift.rho}, {"D", h.drift.d_const}, {"V_star", h.drift.v_star}}},
            {"minorization", {{"delta", io::to_json(h.minor.delta)}, {"nu", nu}}},
            {"certificate", io::to_json(cert)}};
  }

  bool certify_diffusion_cmd(const io::DiffusionSpec& spec) {
    const DiffusionCertificate dc = certify_diffusion(spec.cls, spec.model);
    write_json("certificate.json", io::to_json(dc));
    return true;
  }

  bool simulate_pmf(const Pmf& p) {
    CouplingOptions opts;
    opts.seed = cfg_.seed;
    opts.n_paths = cfg_.paths.value_or(10000);
    if (!cfg_.r_grid.empty()) opts.r = cfg_.r_grid.front();
    const Pmf a = Pmf::delta(0);
    const Pmf b = stationary_delay(p);
    const CouplingEstimates est = simulate_coupling(a, b, p, opts);
    write_json("estimates.json", io::to_json(est));
    Table tail({"n", "p_tau_gt_n"});
    for (std::size_t n = 0; n < est.tail_tau.size(); ++n) tail.add({n, est.tail_tau[n]});
    write_table("coupling_tail", tail);
    return true;
  }

  bool simulate_family(const io::FamilySpec& fam) {
    const long n = n_max_or(200);
    Table t({"chain", "x0", "n", "state"});
    std::uint64_t stream = 0;
    for (std::size_t c = 0; c < fam.chains.size(); ++c) {
      for (int x0 = 0; x0 < fam.chains[c].n_states(); ++x0) {
        const auto path = simulate_chain(fam.chains[c], x0, n, substream_seed(cfg_.seed, stream++));
        for (std::size_t k = 0; k < path.size(); ++k) t.add({c, x0, k, path[k]});
      }
    }
    write_table("paths", t);
    return true;
  }

  static constexpr double kEulerDt = 1e-2;

  bool simulate_diffusion(const io::DiffusionSpec& spec) {
    const long t_max = n_max_or(20);
    const std::size_t n_paths = cfg_.paths.value_or(10000);
    Table t({"x0", "t", "mean", "variance"});
    std::uint64_t s = 0;
    for (double x0 : {0.0, 2.0, 5.0}) {
      const Ensemble e = euler_ensemble(spec.model, x0, static_cast<double>(t_max), kEulerDt, n_paths,
                                        cfg_.seed + s++);
      for (std::size_t k = 0; k < e.n_times; ++k) {
        double m = 0.0;
        for (std::size_t i = 0; i < e.n_paths; ++i) m += e.at(i, k);
        m /= static_cast<double>(e.n_paths);
        double v = 0.0;
        for (std::size_t i = 0; i < e.n_paths; ++i) v += (e.at(i, k) - m) * (e.at(i, k) - m);
        v /= static_cast<double>(std::max<std::size_t>(e.n_paths, 2) - 1);
        t.add({x0, k, m, v});
      }
    }
    write_table("skeleton_moments", t);
    return true;
  }

  bool verify_pmf(const Pmf& p) {
    const long n_max = n_max_or(200);
    const auto res = renewal_tables(p, n_max);

    // b * u(j) = 1/m.
    const Pmf b = stationary_delay(p);
    double worst = 0.0;
    for (long j = 0; j <= n_max; ++j) {
      double s = 0.0;
      for (long i = 0; i <= j; ++i) s += b(static_cast<std::size_t>(i)) * res.u[static_cast<std::size_t>(j - i)];
      worst = std::max(worst, std::fabs(s - res.inv_mean));
    }
    const bool delay_ok = worst <= 1e-10;
    const bool ok = res.violations == 0 && delay_ok;
    json checks = json::array();
    checks.push_back({{"name", "renewal_domination"}, {"violations", res.violations}, {"pass", res.violations == 0}});
    checks.push_back({{"name", "stationary_delay_identity"}, {"max_error", worst}, {"pass", delay_ok}});
    write_json("summary.json", {{"pass", ok}, {"checks", checks}});
    return ok;
  }

  bool verify_family(const io::FamilySpec& fam) {
    const long n_max = n_max_or(500);
    const H1H2 h = verify_h1_h2(fam.chains, fam.v, fam.c_set);
    const Certificate cert = certificate_assemble(h.drift, h.minor);
    write_json("certificate.json", chain_json(h, cert));

    json checks = json::array();
    bool ok = true;
    for (std::size_t c = 0; c < fam.chains.size(); ++c) {
      for (int x = 0; x < fam.chains[c].n_states(); ++x) {
        const auto reps = deviation_reports(fam.chains[c], fam.v, x, n_max, cert);
        Table t({"n", "exact_deviation", "log_bound", "bound", "slack", "dominated"});
        long violations = 0;
        for (const auto& r : reps) {
          const bool dom = cert.dominates(r.exact_dev, static_cast<double>(r.n), fam.v(x));
          if (!dom) ++violations;
          t.add({r.n, r.exact_dev, io::to_json(r.log_bound), bound_json(r.log_bound), io::to_json(r.slack), dom});
        }
        const std::string stem = "deviation_chain" + std::to_string(c) + "_x" + std::to_string(x);
        write_table(stem, t);
        ok = ok && violations == 0;
        checks.push_back({{"name", stem}, {"violations", violations}, {"pass", violations == 0}});
      }
    }
    write_json("summary.json", {{"pass", ok}, {"checks", checks}});
    return ok;
  }

  bool verify_diffusion(const io::DiffusionSpec& spec) {
    const long t_max = n_max_or(20);
    const std::size_t n_paths = cfg_.paths.value_or(10000);
    const DiffusionCertificate dc = certify_diffusion(spec.cls, spec.model);
    write_json("certificate.json", io::to_json(dc));

    const InvariantDensity inv(spec.model, spec.cls);
    const auto rows = empirical_domination(dc, spec.model, inv, smooth_bump, {0.0, 2.0, 5.0}, t_max,
                                           n_paths, kEulerDt, cfg_.seed);
    Table t({"x0", "t", "mc_mean", "mc_stderr", "pi_g", "log_bound", "dominated"});
    long violations = 0;
    for (const auto& r : rows) {
      if (!r.dominated) ++violations;
      t.add({r.x0, r.t, r.mc_mean, r.mc_stderr, r.pi_g, io::to_json(r.log_bound), r.dominated});
    }
    write_table("empirical_domination", t);

    json checks = json::array();
    checks.push_back({{"name", "drift_check"}, {"grid_violations", dc.lyapunov.grid_violations},
                      {"pass", dc.lyapunov.passed()}});
    checks.push_back({{"name", "empirical_domination"}, {"violations", violations}, {"pass", violations == 0},
                      {"paths", n_paths}, {"dt", kEulerDt}});
    const bool ok = dc.lyapunov.passed() && violations == 0;
    write_json("summary.json", {{"pass", ok}, {"checks", checks}});
    return ok;
  }

  RunConfig cfg_;
};

int report_error(const RunConfig& cfg, const std::string& kind, const std::string& message, int code) {
  const json err = {{"error", {{"kind", kind}, {"message", message}}}, {"exit_code", code},
                    {"command", cfg.command}, {"seed", cfg.seed}};
  const std::string text = err.dump(2) + "\n";
  std::cout << text;
  std::error_code ec;
  if (!cfg.output_dir.empty() && fs::create_directories(cfg.output_dir, ec), fs::is_directory(cfg.output_dir, ec)) {
    try {
      io::write_atomic((fs::path(cfg.output_dir) / "error.json").string(), text);
    } catch (const Error&) {
      // stdout already carries the error.
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit geometric-ergodicity certificates"};
  app.require_subcommand(1);
  RunConfig cfg;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"renewal", "u(n), the renewal bound curve and the constants ledger for an increment law"},
      {"certify-chain", "certificate for a family of finite chains sharing (V, C)"},
      {"certify-diffusion", "drift report, minorization and certificate for a 1-d diffusion"},
      {"simulate", "paths or Monte Carlo estimates for any input kind"},
      {"verify", "domination suites with deviation tables and a pass/fail summary"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--input", cfg.input_path, "input JSON")->required();
    sub->add_option("--out", cfg.output_dir, "output directory")->required();
    sub->add_option("--seed", cfg.seed, "RNG seed, recorded in every artifact");
    sub->add_option("--n-max", cfg.n_max, "horizon (steps or skeleton times)");
    sub->add_option("--r-grid", cfg.r_grid, "candidate rates r")->delimiter(',');
    sub->add_option("--format", cfg.format, "table format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--paths", cfg.paths, "Monte Carlo path count");
    sub->callback([&cfg, name = name] { cfg.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error(cfg, "invalid_input", e.what(), kExitInvalid);
  }

  try {
    return Runner(cfg).run();
  } catch (const InvalidInput& e) {
    return report_error(cfg, "invalid_input", e.what(), kExitInvalid);
  } catch (const ConditionFailure& e) {
    return report_error(cfg, "condition_failure", e.what(), kExitCheck);
  } catch (const NumericOverflow& e) {
    return report_error(cfg, "numeric_overflow", e.what(), kExitCheck);
  } catch (const TruncationError& e) {
    return report_error(cfg, "truncation", e.what(), kExitCheck);
  }
}

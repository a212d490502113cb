#pragma once
// JSON and CSV plumbing shared by the command-line tool and the Python module.

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "ergocert/chain_cert.hpp"
#include "ergocert/diffusion.hpp"
#include "ergocert/finite_chain.hpp"
#include "ergocert/markov_sim.hpp"
#include "ergocert/pmf.hpp"
#include "ergocert/renewal.hpp"

namespace ergocert::io {

using nlohmann::json;

/// Shortest decimal that round-trips ("nan"/"inf" for non-finite values).
std::string fmt(double v);
/// fmt(value) when it fits a double, else a decimal string ("3.2e-5951"), else "exp(<log>)".
std::string fmt(const Magnitude& m);
std::string fmt(const XReal& x);

/// A number when it fits a double, otherwise the decimal string from fmt.
json to_json(const Magnitude& m);
json to_json(const XReal& x);

json to_json(const Certificate& c);
json to_json(const CouplingConstants& c);
json to_json(const LyapunovReport& r);
json to_json(const MinorizationReport& r);
json to_json(const DiffusionCertificate& d);
json to_json(const CouplingEstimates& e);

/// Parses a file; errors become InvalidInput naming the path.
json read_json(const std::string& path);

/// Increment law: {"masses": [...], "offset": 1} or {"kind": "geometric", "q", "n_terms"},
/// {"kind": "uniform", "lo", "hi"}, {"kind": "truncated_geometric", "q", "max"}.
Pmf pmf_from_json(const json& j);

struct FamilySpec {
  std::vector<FiniteChain> chains;
  Eigen::VectorXd v;
  std::vector<int> c_set;
};

/// {"chains": [[[...]...]...] | "transition": [[...]...], "v": [...], "c_set": [...]}.
FamilySpec family_from_json(const json& j);

struct DiffusionSpec {
  DriftClassParams cls;
  DiffusionModel model;
};

/// {"drift": {"kind": "ou" | "piecewise_linear" | "tabulated", ...},
///  "sigma": {"kind": "constant" | "tanh", ...}, "class": {"M", "a", "L", "epsilon"},
///  "s_deriv_compact_bound": optional override}.
DiffusionSpec diffusion_from_json(const json& j);

/// Writes to path.tmp and renames over path.
void write_atomic(const std::string& path, const std::string& content);

/// CSV writer: a "# seed=" line, a header row, then rows joined with commas.
class Csv {
 public:
  Csv(std::uint64_t seed, std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  std::string str() const { return out_; }

 private:
  std::size_t width_;
  std::string out_;
};

}  // namespace ergocert::io

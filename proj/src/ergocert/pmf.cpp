#include "ergocert/pmf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "ergocert/error.hpp"

namespace ergocert {

namespace {

double neumaier_sum(const std::vector<double>& v) {
  double s = 0.0;
  double c = 0.0;
  for (double x : v) {
    const double t = s + x;
    c += std::fabs(s) >= std::fabs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

Pmf::Pmf() : offset_(0), masses_{1.0}, tail_(0.0) {}

Pmf::Pmf(std::size_t offset, std::vector<double> masses, double tail_mass_bound)
    : offset_(offset), masses_(std::move(masses)), tail_(tail_mass_bound) {
  if (masses_.empty()) throw InvalidInput("pmf: empty mass vector");
  for (std::size_t i = 0; i < masses_.size(); ++i) {
    const double m = masses_[i];
    if (!std::isfinite(m) || m < 0.0 || m > 1.0) {
      throw InvalidInput("pmf: mass at index " + std::to_string(offset_ + i) + " is " + fmt(m) +
                         ", outside [0, 1]");
    }
  }
  if (!std::isfinite(tail_) || tail_ < 0.0 || tail_ > 1.0) {
    throw InvalidInput("pmf: tail_mass_bound outside [0, 1]");
  }
  const double total = stored_mass() + tail_;
  if (std::fabs(total - 1.0) > 1e-12) {
    throw InvalidInput("pmf: stored mass plus tail is " + fmt(total) + ", not 1 within 1e-12");
  }
}

Pmf Pmf::delta(std::size_t k) { return Pmf(k, {1.0}, 0.0); }

Pmf Pmf::from_weights(std::size_t offset, const std::vector<double>& weights) {
  const double s = neumaier_sum(weights);
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("pmf: weights must have positive sum");
  std::vector<double> m(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) throw InvalidInput("pmf: negative weight");
    m[i] = weights[i] / s;
  }
  return Pmf(offset, std::move(m), 0.0);
}

Pmf Pmf::geometric(double q, std::size_t n_terms) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidInput("geometric: q must lie in (0, 1]");
  if (n_terms == 0) throw InvalidInput("geometric: need at least one term");
  std::vector<double> m(n_terms);
  for (std::size_t k = 0; k < n_terms; ++k) m[k] = q * std::pow(1.0 - q, static_cast<double>(k));
  return Pmf(1, std::move(m), std::pow(1.0 - q, static_cast<double>(n_terms)));
}

double Pmf::stored_mass() const { return neumaier_sum(masses_); }

double Pmf::mean() const {
  if (tail_ > 1e-12) {
    throw InvalidInput("pmf: mean undefined for a truncated law with tail mass " + fmt(tail_));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < masses_.size(); ++i) {
    s += static_cast<double>(offset_ + i) * masses_[i];
  }
  return s;
}

void Pmf::require_increment(const char* what) const {
  if (!is_increment()) {
    throw InvalidInput(std::string(what) + ": increment law must satisfy p(0) = 0");
  }
}

Pmf convolve(const Pmf& f, const Pmf& g, const ConvolveOptions& opts) {
  const auto& a = f.masses();
  const auto& b = g.masses();
  const std::size_t full = a.size() + b.size() - 1;
  const std::size_t kept = std::min(full, opts.support_cap);
  std::vector<double> out(full, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  TruncationReport rep;
  if (kept < full) {
    rep.truncated = true;
    rep.dropped_entries = full - kept;
    std::vector<double> dropped(out.begin() + static_cast<std::ptrdiff_t>(kept), out.end());
    rep.dropped_mass = neumaier_sum(dropped);
    out.resize(kept);
    if (opts.report == nullptr) {
      throw TruncationError("convolve: result needs " + std::to_string(full) +
                            " entries, cap is " + std::to_string(opts.support_cap) +
                            "; dropped mass " + fmt(rep.dropped_mass));
    }
  }
  if (opts.report != nullptr) *opts.report = rep;
  const double tf = f.tail_mass_bound();
  const double tg = g.tail_mass_bound();
  double tail = tf + tg - tf * tg + rep.dropped_mass;
  tail = std::min(1.0, std::max(0.0, tail));
  return Pmf(f.offset() + g.offset(), std::move(out), tail);
}

std::string to_text(const Pmf& p) {
  std::ostringstream os;
  os << "tail_mass_bound " << fmt(p.tail_mass_bound()) << "\n";
  for (std::size_t i = 0; i < p.masses().size(); ++i) {
    os << (p.offset() + i) << " " << fmt(p.masses()[i]) << "\n";
  }
  return os.str();
}

Pmf pmf_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  double tail = 0.0;
  bool have_header = false;
  std::map<std::size_t, double> entries;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "tail_mass_bound") {
      if (!(ls >> tail)) throw InvalidInput("pmf text: bad tail_mass_bound header");
      have_header = true;
      continue;
    }
    long long idx = -1;
    double mass = 0.0;
    try {
      idx = std::stoll(first);
    } catch (const std::exception&) {
      throw InvalidInput("pmf text: line " + std::to_string(line_no) + " has a non-integer index");
    }
    if (idx < 0 || !(ls >> mass)) {
      throw InvalidInput("pmf text: line " + std::to_string(line_no) + " is not 'index mass'");
    }
    if (!entries.emplace(static_cast<std::size_t>(idx), mass).second) {
      throw InvalidInput("pmf text: duplicate index " + std::to_string(idx));
    }
  }
  if (!have_header) throw InvalidInput("pmf text: missing tail_mass_bound header");
  if (entries.empty()) throw InvalidInput("pmf text: no masses");
  const std::size_t lo = entries.begin()->first;
  const std::size_t hi = entries.rbegin()->first;
  std::vector<double> m(hi - lo + 1, 0.0);
  for (const auto& [k, v] : entries) m[k - lo] = v;
  return Pmf(lo, std::move(m), tail);
}

}  // namespace ergocert

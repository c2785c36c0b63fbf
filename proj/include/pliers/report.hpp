#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pliers/metrics.hpp"
#include "pliers/simulator.hpp"

namespace pliers {

inline constexpr std::string_view kMetricsHeader =
    "step,sim_time_s,avg_graph_jaccard,avg_rec_jaccard,avg_rec_spearman_corrected,avg_rec_spearman_literal,"
    "n_contacts,n_contents";
inline constexpr std::string_view kCorrelationHeader =
    "n,r_yx1,r_yx2,r_squared,beta1,beta2,degenerate_x1,degenerate_x2,singular_fit";

/// Nine significant digits, shortest form, `.` separator.
inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

inline void write_metrics_csv(std::ostream& out, const std::vector<StepMetrics>& rows) {
  out << kMetricsHeader << '\n';
  for (const auto& m : rows) {
    out << m.step << ',' << m.sim_time << ',' << format_real(m.avg_graph_jaccard) << ','
        << format_real(m.avg_rec_jaccard) << ',' << format_real(m.avg_rec_spearman_corrected) << ','
        << format_real(m.avg_rec_spearman_literal) << ',' << m.n_contacts << ',' << m.n_contents << '\n';
  }
}

/// Regression of the per-row similarity change on content and contact counts.
/// Fewer than three deltas leave only the header.
inline void write_correlation_csv(std::ostream& out, const std::vector<StepMetrics>& rows) {
  out << kCorrelationHeader << '\n';
  auto s = similarity_deltas(rows);
  if (s.delta.size() < 3) return;
  auto r = correlation_analysis(s.delta, s.contents, s.contacts);
  out << s.delta.size() << ',' << format_real(r.r_yx1) << ',' << format_real(r.r_yx2) << ','
      << format_real(r.r_squared) << ',' << format_real(r.beta1) << ',' << format_real(r.beta2) << ','
      << r.degenerate_x1 << ',' << r.degenerate_x2 << ',' << r.singular_fit << '\n';
}

/// 64-bit FNV-1a, hex encoded. Identifies inputs and outputs in manifests.
class Fnv1a {
 public:
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ULL;
    }
  }

  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_));
    return buf;
  }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

inline std::string digest(std::string_view bytes) {
  Fnv1a h;
  h.update(bytes);
  return h.hex();
}

inline std::string digest(std::istream& in) {
  Fnv1a h;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) h.update({buf, static_cast<std::size_t>(in.gcount())});
  return h.hex();
}

}  // namespace pliers

#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pliers/graph_io.hpp"
#include "pliers/types.hpp"

namespace pliers {

enum class PolicyKind { MeanThreshold, PercentileThreshold, BoundedBuffer };

struct DownloadPolicySpec {
  PolicyKind kind = PolicyKind::MeanThreshold;
  double percentile = 50.0;         ///< PercentileThreshold only, in [0, 100]
  std::size_t capacity = 0;         ///< BoundedBuffer only
  Seconds history_window = 3600;    ///< span of the score history

  bool operator==(const DownloadPolicySpec&) const = default;
};

/// Parses `mean[:window_s]`, `percentile:P[:window_s]` or `buffer:CAPACITY`.
inline std::optional<DownloadPolicySpec> parse_download_policy(std::string_view text) {
  auto parts = detail::split(text, ':');
  DownloadPolicySpec spec;
  std::int64_t value = 0;
  auto window_at = [&](std::size_t idx) {
    if (parts.size() <= idx) return true;
    if (parts.size() > idx + 1 || !detail::parse_int(parts[idx], value) || value <= 0) return false;
    spec.history_window = value;
    return true;
  };
  if (parts[0] == "mean") {
    spec.kind = PolicyKind::MeanThreshold;
    if (!window_at(1)) return std::nullopt;
  } else if (parts[0] == "percentile") {
    spec.kind = PolicyKind::PercentileThreshold;
    if (parts.size() < 2 || !detail::parse_int(parts[1], value) || value < 0 || value > 100) return std::nullopt;
    spec.percentile = static_cast<double>(value);
    if (!window_at(2)) return std::nullopt;
  } else if (parts[0] == "buffer") {
    spec.kind = PolicyKind::BoundedBuffer;
    if (parts.size() != 2 || !detail::parse_int(parts[1], value) || value <= 0) return std::nullopt;
    spec.capacity = static_cast<std::size_t>(value);
  } else {
    return std::nullopt;
  }
  return spec;
}

inline std::string to_string(const DownloadPolicySpec& s) {
  switch (s.kind) {
    case PolicyKind::MeanThreshold: return "mean:" + std::to_string(s.history_window);
    case PolicyKind::PercentileThreshold:
      return "percentile:" + std::to_string(static_cast<int>(s.percentile)) + ":" +
             std::to_string(s.history_window);
    case PolicyKind::BoundedBuffer: return "buffer:" + std::to_string(s.capacity);
  }
  return "?";
}

enum class Decision { Download, Skip };

/// Per-agent automatic download rule over PLIERS scores of newly seen items.
///
/// Every observed score enters a FIFO history limited to `history_window`
/// seconds. Threshold policies compare a new score strictly against the mean or
/// the nearest-rank percentile of the history as it was before the score
/// arrived; an empty history downloads everything. The buffer policy admits
/// items until full, then evicts the lowest-scored buffered item when a
/// strictly better one arrives.
class DownloadPolicyState {
 public:
  struct Buffered {
    std::string item;
    double score;
  };

  explicit DownloadPolicyState(DownloadPolicySpec spec) : spec_(spec) {}

  Decision observe(std::string_view item, double score, Seconds now) {
    if (score < 0.0) throw InvalidInput("download policy: negative score");
    while (!history_.empty() && history_.front().first < now - spec_.history_window) history_.pop_front();
    Decision d = decide(item, score);
    history_.emplace_back(now, score);
    ++observed_;
    if (d == Decision::Download) ++downloaded_;
    return d;
  }

  const DownloadPolicySpec& spec() const { return spec_; }
  const std::vector<Buffered>& buffer() const { return buffer_; }
  std::size_t history_size() const { return history_.size(); }
  std::size_t observed() const { return observed_; }
  std::size_t downloaded() const { return downloaded_; }

 private:
  Decision decide(std::string_view item, double score) {
    switch (spec_.kind) {
      case PolicyKind::MeanThreshold: {
        if (history_.empty()) return Decision::Download;
        double sum = 0.0;
        for (const auto& [t, s] : history_) sum += s;
        return score > sum / static_cast<double>(history_.size()) ? Decision::Download : Decision::Skip;
      }
      case PolicyKind::PercentileThreshold: {
        if (history_.empty()) return Decision::Download;
        std::vector<double> sorted;
        sorted.reserve(history_.size());
        for (const auto& [t, s] : history_) sorted.push_back(s);
        std::sort(sorted.begin(), sorted.end());
        // Nearest-rank percentile.
        auto rank = static_cast<std::size_t>(std::ceil(spec_.percentile / 100.0 * static_cast<double>(sorted.size())));
        rank = std::clamp<std::size_t>(rank, 1, sorted.size());
        return score > sorted[rank - 1] ? Decision::Download : Decision::Skip;
      }
      case PolicyKind::BoundedBuffer: {
        if (buffer_.size() < spec_.capacity) {
          buffer_.push_back({std::string(item), score});
          return Decision::Download;
        }
        auto lowest = std::min_element(buffer_.begin(), buffer_.end(),
                                       [](const Buffered& a, const Buffered& b) { return a.score < b.score; });
        if (lowest == buffer_.end() || score <= lowest->score) return Decision::Skip;
        *lowest = {std::string(item), score};
        return Decision::Download;
      }
    }
    return Decision::Skip;
  }

  DownloadPolicySpec spec_;
  std::deque<std::pair<Seconds, double>> history_;
  std::vector<Buffered> buffer_;
  std::size_t observed_ = 0;
  std::size_t downloaded_ = 0;
};

}  // namespace pliers

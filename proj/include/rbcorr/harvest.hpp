#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rbcorr/prompts.hpp"
#include "rbcorr/types.hpp"

namespace rbcorr {

/// HTTP endpoint serving next-token log-probabilities via the common
/// completions JSON shape (prompt in, per-position top-k logprobs out).
struct EndpointConfig {
  std::string base_url;  // e.g. "http://127.0.0.1:8080"
  std::string model;
  double timeout_seconds = 30.0;
  int max_concurrency = 4;
  std::string auth_env_var;  // env var holding a bearer token; empty = none
  int top_logprobs = 20;
  int max_retries = 3;
};

// Logprob substituted when the endpoint's top-k omits a requested token; the
// affected token is flagged, never silently trusted.
inline constexpr double kMissingTokenFloor = -100.0;

struct VariantFetch {
  // canonical label -> [(token, logprob)] for the label and its
  // space-prefixed variant; merging is deferred to ingest.
  std::map<std::string, std::vector<std::pair<std::string, double>>>
      raw_variants;
  std::vector<std::string> floored_tokens;
};

/// Scores each canonical label token and its single-space-prefixed variant at
/// the next-token position. Transport errors are retried with bounded
/// exponential backoff, then surfaced as Error.
VariantFetch fetch_option_logprobs(const EndpointConfig& endpoint,
                                   const std::string& prompt,
                                   const OptionSpace& space);

struct HarvestItem {
  std::string item_id;
  std::string text;
  std::string gold_label;
};

// JSONL: {"item_id": str, "text": str, "gold_label": str}
std::vector<HarvestItem> load_harvest_items(const std::filesystem::path& path);

struct HarvestSummary {
  int fetched = 0;
  int skipped = 0;  // already present in the output (resume)
  int failed = 0;
  std::vector<std::string> failed_items;
  std::vector<std::string> flagged_items;  // had floor-substituted tokens
};

/// Fetches one record per item plus three content-free probe records ("N/A",
/// "[MASK]", empty string substituted into the item slot). Output is
/// append-safe and resumable keyed by item_id; per-item failures are listed
/// in the summary and do not abort the run. At most
/// endpoint.max_concurrency requests are in flight at once.
HarvestSummary harvest_run(std::span<const HarvestItem> items,
                           const PromptTemplate& tpl,
                           const EndpointConfig& endpoint,
                           const std::filesystem::path& output,
                           const RunConfig& run);

}  // namespace rbcorr

#include "rbcorr/harvest.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "rbcorr/ingest.hpp"

namespace rbcorr {

namespace {

nlohmann::json post_completion(const EndpointConfig& endpoint,
                               const std::string& prompt) {
  httplib::Client client(endpoint.base_url);
  const auto timeout = std::chrono::milliseconds(
      static_cast<long>(endpoint.timeout_seconds * 1000.0));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (!endpoint.auth_env_var.empty()) {
    const char* token = std::getenv(endpoint.auth_env_var.c_str());
    if (token == nullptr || *token == '\0') {
      throw Error("harvest: auth env var '" + endpoint.auth_env_var +
                  "' is unset or empty");
    }
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  nlohmann::json body;
  body["model"] = endpoint.model;
  body["prompt"] = prompt;
  body["max_tokens"] = 1;
  body["logprobs"] = endpoint.top_logprobs;
  body["temperature"] = 0;

  std::string last_error;
  for (int attempt = 0; attempt <= endpoint.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(100L << (attempt - 1)));
    }
    auto res = client.Post("/v1/completions", headers, body.dump(),
                           "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "endpoint returned status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error("harvest: endpoint returned status " +
                  std::to_string(res->status) + ": " +
                  res->body.substr(0, 200));
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("harvest: malformed endpoint response: ") +
                  e.what());
    }
  }
  throw Error("harvest: " + last_error + " after " +
              std::to_string(endpoint.max_retries + 1) + " attempts");
}

}  // namespace

VariantFetch fetch_option_logprobs(const EndpointConfig& endpoint,
                                   const std::string& prompt,
                                   const OptionSpace& space) {
  const nlohmann::json response = post_completion(endpoint, prompt);

  const nlohmann::json* top = nullptr;
  try {
    top = &response.at("choices").at(0).at("logprobs").at("top_logprobs").at(0);
  } catch (const nlohmann::json::exception&) {
    throw Error("harvest: response lacks choices[0].logprobs.top_logprobs[0]");
  }
  if (!top->is_object()) {
    throw Error("harvest: top_logprobs[0] is not a token->logprob object");
  }

  VariantFetch fetch;
  for (const auto& label : space.labels()) {
    auto& variants = fetch.raw_variants[label];
    for (const std::string& token : {label, " " + label}) {
      auto it = top->find(token);
      if (it != top->end() && it->is_number()) {
        variants.emplace_back(token, it->get<double>());
      } else {
        variants.emplace_back(token, kMissingTokenFloor);
        fetch.floored_tokens.push_back(token);
      }
    }
  }
  return fetch;
}

std::vector<HarvestItem> load_harvest_items(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open items file: " + path.string());
  std::vector<HarvestItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where =
        path.string() + ":" + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(where + "parse error: " + e.what());
    }
    HarvestItem item;
    try {
      item.item_id = j.at("item_id").get<std::string>();
      item.text = j.at("text").get<std::string>();
      item.gold_label = j.at("gold_label").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(where + e.what());
    }
    items.push_back(std::move(item));
  }
  return items;
}

namespace {

// Ids already present in an existing output file. A trailing partial line
// (interrupted write) is trimmed so the resumed append stays well-formed.
std::unordered_set<std::string> existing_ids(
    const std::filesystem::path& output) {
  std::unordered_set<std::string> ids;
  if (!std::filesystem::exists(output)) return ids;

  std::string content;
  {
    std::ifstream in(output, std::ios::binary);
    content.assign(std::istreambuf_iterator<char>(in),
                   std::istreambuf_iterator<char>());
  }
  const std::size_t last_newline = content.find_last_of('\n');
  if (last_newline == std::string::npos) {
    if (!content.empty()) std::filesystem::resize_file(output, 0);
    return ids;
  }
  if (last_newline + 1 != content.size()) {
    std::filesystem::resize_file(output, last_newline + 1);
    content.resize(last_newline + 1);
  }

  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string::npos) end = content.size();
    const std::string line = content.substr(pos, end - pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ids.insert(j.at("item_id").get<std::string>());
    } catch (const nlohmann::json::exception&) {
      // Unparseable interior line; ingest will report it properly.
    }
  }
  return ids;
}

struct ProbeSpec {
  const char* id;
  const char* text;
};

constexpr ProbeSpec kProbes[] = {
    {"content-free:na", "N/A"},
    {"content-free:mask", "[MASK]"},
    {"content-free:empty", ""},
};

}  // namespace

HarvestSummary harvest_run(std::span<const HarvestItem> items,
                           const PromptTemplate& tpl,
                           const EndpointConfig& endpoint,
                           const std::filesystem::path& output,
                           const RunConfig& run) {
  if (items.empty()) {
    throw std::invalid_argument("harvest_run: empty item list");
  }
  if (run.question_type != tpl.question_type) {
    throw std::invalid_argument(
        "harvest_run: run question_type does not match the template");
  }
  const OptionSpace& space = run.space();

  struct Task {
    HarvestItem item;
    bool content_free = false;
  };
  std::vector<Task> tasks;
  const auto done = existing_ids(output);

  HarvestSummary summary;
  for (const auto& item : items) {
    if (done.count(item.item_id)) {
      ++summary.skipped;
    } else {
      tasks.push_back(Task{item, false});
    }
  }
  for (const auto& probe : kProbes) {
    if (done.count(probe.id)) {
      ++summary.skipped;
    } else {
      // Placeholder gold; probe records are exempt from gold validation and
      // excluded from evaluation.
      tasks.push_back(
          Task{HarvestItem{probe.id, probe.text, space.labels().front()},
               true});
    }
  }

  std::ofstream out(output, std::ios::app);
  if (!out) throw Error("cannot open output for append: " + output.string());

  std::mutex write_mutex;
  std::atomic<std::size_t> next{0};
  const int n_workers = std::max(
      1, std::min<int>(endpoint.max_concurrency,
                       static_cast<int>(tasks.size())));

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      try {
        const std::string prompt = build_prompt(tpl, task.item.text);
        VariantFetch fetch = fetch_option_logprobs(endpoint, prompt, space);

        LogProbRecord rec;
        rec.item_id = task.item.item_id;
        rec.run = run;
        rec.gold_label = task.item.gold_label;
        rec.is_content_free = task.content_free;
        rec.raw_variants = std::move(fetch.raw_variants);
        for (const auto& [label, variants] : rec.raw_variants) {
          rec.option_logprobs[label] = merge_variants(variants);
        }

        const std::string line = record_to_json(rec).dump();
        std::lock_guard<std::mutex> lock(write_mutex);
        out << line << '\n';
        out.flush();
        ++summary.fetched;
        if (!fetch.floored_tokens.empty()) {
          summary.flagged_items.push_back(task.item.item_id);
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(write_mutex);
        ++summary.failed;
        summary.failed_items.push_back(task.item.item_id +
                                       std::string(": ") + e.what());
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  return summary;
}

}  // namespace rbcorr

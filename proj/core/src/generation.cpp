#include "arggen/generation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <set>
#include <thread>

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "arggen/error.hpp"
#include "arggen/text.hpp"
#include "json_util.hpp"

namespace arggen::generation {

namespace {

using detail::json;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

json config_to_json(const FineTuneConfig& c) {
  return {{"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"max_tokens", c.max_tokens}};
}

FineTuneConfig config_from_json(const json& j) {
  FineTuneConfig c;
  c.epochs = j.at("epochs").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.max_tokens = j.value("max_tokens", std::size_t{0});
  return c;
}

void check_family(const TrainingSet& set, Family family) {
  const bool causal = std::holds_alternative<std::vector<std::string>>(set);
  if (causal != (family == Family::Causal)) {
    throw Error(ErrorCode::InvalidRecord, std::string("training set does not match the ") +
                                              std::string(pairs::to_string(family)) + " family");
  }
}

void erase_all(std::string& s, std::string_view token) {
  for (auto pos = s.find(token); pos != std::string::npos; pos = s.find(token)) s.erase(pos, token.size());
}

}  // namespace

// --- echo adapter -----------------------------------------------------------

std::size_t EchoAdapter::count_tokens(std::string_view text) const { return corpus::count_words(text); }

std::vector<double> EchoAdapter::fine_tune(const TrainingSet& train, const TrainingSet& validation,
                                           const FineTuneConfig& config) {
  check_family(train, family_);
  check_family(validation, family_);
  if (family_ == Family::Causal) {
    for (const auto& s : std::get<std::vector<std::string>>(train)) {
      auto pair = pairs::parse_causal_example(s);
      add_reference(pairs::TrainingExample{family_, pair.facts_summary, ""}.source(), pair.argument_summary);
    }
  } else {
    for (const auto& st : std::get<std::vector<SourceTarget>>(train)) add_reference(st.source, st.target);
  }
  return std::vector<double>(config.epochs, 0.0);
}

std::string EchoAdapter::generate(std::string_view prompt, const GenerateOptions&) const {
  auto it = table_.find(prompt);
  return it == table_.end() ? std::string() : it->second;
}

void EchoAdapter::add_reference(std::string prompt, std::string target) {
  table_[std::move(prompt)] = std::move(target);
}

void EchoAdapter::save(const std::filesystem::path& checkpoint) const {
  json table = json::object();
  for (const auto& [k, v] : table_) table[k] = v;
  detail::write_json_file(checkpoint / "echo.json",
                          {{"format", "arggen.echo"}, {"family", std::string(pairs::to_string(family_))}, {"table", table}});
}

void EchoAdapter::load(const std::filesystem::path& checkpoint) {
  auto j = detail::read_json_file(checkpoint / "echo.json");
  family_ = pairs::parse_family(j.at("family").get<std::string>());
  table_.clear();
  for (const auto& [k, v] : j.at("table").items()) table_[k] = v.get<std::string>();
}

// --- manifest ---------------------------------------------------------------

std::string to_json(const RunManifest& m) {
  json j = {
      {"format_version", kManifestVersion},
      {"run_id", m.run_id},
      {"model_id", m.model_id},
      {"family", std::string(pairs::to_string(m.family))},
      {"k", m.k},
      {"data_source", std::string(pairs::to_string(m.data_source))},
      {"config", config_to_json(m.config)},
      {"dataset_fingerprint", m.dataset_fingerprint},
      {"train_count", m.train_count},
      {"validation_count", m.validation_count},
      {"validation_losses", m.validation_losses},
      {"checkpoint", m.checkpoint},
      {"created_at", m.created_at},
      {"finished_at", m.finished_at},
  };
  return j.dump(2);
}

RunManifest manifest_from_json(std::string_view json_text) {
  auto j = detail::parse_json(json_text, 1);
  try {
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.model_id = j.at("model_id").get<std::string>();
    m.family = pairs::parse_family(j.at("family").get<std::string>());
    m.k = j.at("k").get<std::size_t>();
    m.data_source = pairs::parse_source(j.at("data_source").get<std::string>());
    m.config = config_from_json(j.at("config"));
    m.dataset_fingerprint = j.value("dataset_fingerprint", std::string());
    m.train_count = j.value("train_count", std::size_t{0});
    m.validation_count = j.value("validation_count", std::size_t{0});
    m.validation_losses = j.value("validation_losses", std::vector<double>{});
    m.checkpoint = j.value("checkpoint", std::string());
    m.created_at = j.value("created_at", std::string());
    m.finished_at = j.value("finished_at", std::string());
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidRecord, std::string("malformed run manifest: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  detail::write_text_file(path, to_json(manifest) + "\n");
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return manifest_from_json(contents);
}

std::string dataset_fingerprint(const std::vector<pairs::FactArgumentPair>& train,
                                const std::vector<pairs::FactArgumentPair>& validation) {
  std::vector<std::string> hashes;
  hashes.reserve(train.size() + validation.size());
  for (const auto& p : train) hashes.push_back(sha256_hex("train\n" + pairs::to_json_line(p)));
  for (const auto& p : validation) hashes.push_back(sha256_hex("validation\n" + pairs::to_json_line(p)));
  std::sort(hashes.begin(), hashes.end());
  return sha256_hex(text::join(hashes, "\n"));
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

// --- harness ----------------------------------------------------------------

pairs::TokenBudget adapter_budget(const ModelAdapter& adapter, const FineTuneConfig& config) {
  pairs::TokenBudget budget;
  budget.family = adapter.family();
  budget.max_tokens = config.effective_max_tokens(adapter.family());
  budget.counter = [&adapter](std::string_view s) { return adapter.count_tokens(s); };
  return budget;
}

std::vector<pairs::FactArgumentPair> fit_to_budget(const std::vector<pairs::FactArgumentPair>& input,
                                                   const ModelAdapter& adapter, const FineTuneConfig& config) {
  const auto budget = adapter_budget(adapter, config);
  std::vector<pairs::FactArgumentPair> out;
  out.reserve(input.size());
  for (const auto& p : input) {
    auto ex = pairs::enforce_budget(pairs::serialize_example(p, adapter.family()), budget);
    if (text::trim(ex.facts).empty() || text::trim(ex.argument).empty()) {
      spdlog::warn("dropping {}: nothing left after fitting the {}-token budget", p.doc_id, budget.max_tokens);
      continue;
    }
    auto fitted = p;
    fitted.facts_summary = ex.facts;
    fitted.argument_summary = ex.argument;
    out.push_back(std::move(fitted));
  }
  return out;
}

TrainingSet make_training_set(const std::vector<pairs::FactArgumentPair>& pairs, Family family) {
  if (family == Family::Causal) {
    std::vector<std::string> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(pairs::serialize_example(p, family).text());
    return out;
  }
  std::vector<SourceTarget> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    auto ex = pairs::serialize_example(p, family);
    out.push_back({ex.source(), ex.target()});
  }
  return out;
}

RunManifest fine_tune_run(const std::vector<pairs::FactArgumentPair>& train_pairs,
                          const std::vector<pairs::FactArgumentPair>& validation_pairs, ModelAdapter& adapter,
                          const FineTuneConfig& config, const RunInfo& info) {
  if (train_pairs.empty()) throw Error(ErrorCode::MissingData, "no training pairs");
  if (config.epochs == 0 || config.batch_size == 0) {
    throw Error(ErrorCode::ConfigError, "epochs and batch_size must be at least 1");
  }
  const auto budget = adapter_budget(adapter, config);
  auto check = [&](const std::vector<pairs::FactArgumentPair>& set) {
    for (const auto& p : set) {
      if (!pairs::fits(pairs::serialize_example(p, adapter.family()), budget)) {
        throw Error(ErrorCode::BudgetViolation,
                    "pair " + p.doc_id + " exceeds the " + std::to_string(budget.max_tokens) + "-token budget");
      }
    }
  };
  check(train_pairs);
  check(validation_pairs);

  RunManifest manifest;
  manifest.run_id = info.run_id;
  manifest.model_id = adapter.model_id();
  manifest.family = adapter.family();
  manifest.k = info.k;
  manifest.data_source = info.data_source;
  manifest.config = config;
  manifest.config.max_tokens = budget.max_tokens;
  manifest.dataset_fingerprint = dataset_fingerprint(train_pairs, validation_pairs);
  manifest.train_count = train_pairs.size();
  manifest.validation_count = validation_pairs.size();
  manifest.created_at = utc_timestamp();

  manifest.validation_losses = adapter.fine_tune(make_training_set(train_pairs, adapter.family()),
                                                 make_training_set(validation_pairs, adapter.family()), config);
  for (std::size_t e = 0; e < manifest.validation_losses.size(); ++e) {
    spdlog::info("run {} epoch {} validation loss {:.6f}", info.run_id, e + 1, manifest.validation_losses[e]);
  }
  manifest.finished_at = utc_timestamp();
  return manifest;
}

std::string test_prompt(const pairs::FactArgumentPair& pair, const ModelAdapter& adapter,
                        const FineTuneConfig& config) {
  return pairs::enforce_budget(pairs::inference_example(pair, adapter.family()), adapter_budget(adapter, config))
      .source();
}

std::string strip_generation(std::string_view raw, std::string_view prompt) {
  std::string out(raw);
  auto trimmed_prompt = text::trim(prompt);
  auto trimmed = text::trim(out);
  if (!trimmed_prompt.empty() && trimmed.compare(0, trimmed_prompt.size(), trimmed_prompt) == 0) {
    out = trimmed.substr(trimmed_prompt.size());
  }
  if (auto pos = out.rfind(pairs::kArgumentsToken); pos != std::string::npos) {
    out = out.substr(pos + pairs::kArgumentsToken.size());
  }
  erase_all(out, pairs::kFactsToken);
  erase_all(out, pairs::kArgumentsToken);
  return text::join(text::split_whitespace(out), " ");
}

std::vector<GenerationRecord> generate_for_test(const std::vector<pairs::FactArgumentPair>& test_pairs,
                                                const ModelAdapter& adapter, const RunManifest& run,
                                                const GenerationSettings& settings) {
  std::set<std::string> seen;
  for (const auto& p : test_pairs) {
    if (!seen.insert(p.doc_id).second) {
      throw Error(ErrorCode::DuplicateId, "test pair " + p.doc_id + " appears twice");
    }
  }
  std::vector<GenerationRecord> records(test_pairs.size());
  auto work = [&](std::size_t i) {
    const auto& pair = test_pairs[i];
    auto prompt = test_prompt(pair, adapter, run.config);
    auto generated = strip_generation(adapter.generate(prompt, settings.options), prompt);
    auto& r = records[i];
    r.doc_id = pair.doc_id;
    r.facts_summary = pair.facts_summary;
    r.reference_argument = pair.argument_summary;
    r.run_id = run.run_id;
    r.empty_generation = generated.empty();
    r.generated_argument = std::move(generated);
    if (r.empty_generation) spdlog::warn("run {}: empty generation for {}", run.run_id, pair.doc_id);
  };

  if (settings.threads <= 1 || !adapter.read_only_safe()) {
    for (std::size_t i = 0; i < test_pairs.size(); ++i) work(i);
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(settings.threads);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < settings.threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = next++; i < test_pairs.size(); i = next++) work(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return records;
}

std::string to_json_line(const GenerationRecord& r) {
  json j = {
      {"doc_id", r.doc_id},
      {"run_id", r.run_id},
      {"facts_summary", r.facts_summary},
      {"generated_argument", r.generated_argument},
      {"reference_argument", r.reference_argument},
      {"empty_generation", r.empty_generation},
  };
  return j.dump();
}

GenerationRecord parse_generation_line(std::string_view line, std::size_t line_number) {
  auto j = detail::parse_json(line, line_number);
  try {
    GenerationRecord r;
    r.doc_id = detail::require<std::string>(j, "doc_id");
    r.run_id = detail::require<std::string>(j, "run_id");
    r.facts_summary = detail::require<std::string>(j, "facts_summary");
    r.generated_argument = detail::require<std::string>(j, "generated_argument");
    r.reference_argument = detail::require<std::string>(j, "reference_argument");
    r.empty_generation = j.value("empty_generation", r.generated_argument.empty());
    return r;
  } catch (const Error& e) {
    throw ParseError(line_number, e.what());
  }
}

void write_generations(const std::filesystem::path& path, const std::vector<GenerationRecord>& records) {
  std::string contents;
  for (const auto& r : records) contents += to_json_line(r) + "\n";
  detail::write_text_file(path, contents);
}

std::vector<GenerationRecord> read_generations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<GenerationRecord> out;
  detail::for_each_line(in, [&](std::string_view line, std::size_t number) {
    out.push_back(parse_generation_line(line, number));
  });
  return out;
}

}  // namespace arggen::generation

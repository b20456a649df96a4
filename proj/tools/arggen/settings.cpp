#include "settings.hpp"

#include <fstream>
#include <sstream>

#include "arggen/error.hpp"

namespace arggen::cli {

using nlohmann::json;

const std::vector<SettingSpec>& setting_specs() {
  static const std::vector<SettingSpec> specs = {
      {"gold", "", "gold-annotated corpus (JSONL file or directory)"},
      {"auto", "", "auto-labeled corpus (JSONL file or directory of .txt)"},
      {"work_dir", ".", "directory holding all stage artifacts"},
      {"seed", 0, "seed for splits, clustering and training"},
      {"train", 70, "train split size"},
      {"validation", 10, "validation split size"},
      {"test", 20, "test split size (drawn from gold documents)"},
      {"k", 5, "sentences per summary"},
      {"family", "seq2seq", "model family: causal|seq2seq"},
      {"model", "tiny", "adapter: tiny|echo"},
      {"source", "original", "training data source: original|rewritten"},
      {"source_label", "", "Source column label in reports"},
      {"run_id", "", "run identifier (default derived from the settings)"},
      {"labeler", "keyword", "role labeler: keyword|crf"},
      {"labeler_epochs", 50, "CRF labeler max epochs"},
      {"labeler_lr", 0.05, "CRF labeler learning rate"},
      {"labeler_batch", 4, "CRF labeler batch size"},
      {"labeler_patience", 10, "CRF labeler early-stopping patience"},
      {"relabel_gold", false, "also relabel gold documents"},
      {"embedding_dim", 256, "hashing embedding dimension"},
      {"epochs", 15, "fine-tune epochs"},
      {"learning_rate", 0.01, "fine-tune learning rate"},
      {"batch_size", 8, "fine-tune batch size"},
      {"max_tokens", 0, "token budget (0: 1024 causal, 512 seq2seq)"},
      {"hidden", 32, "tiny adapter hidden size"},
      {"max_vocab", 8000, "tiny adapter vocabulary cap"},
      {"max_new_tokens", 256, "generation length cap"},
      {"beam_width", 1, "beam width (1: greedy)"},
      {"threads", 1, "generation worker threads"},
      {"overlap", "recall", "word overlap direction: recall|precision|f1"},
      {"rewrite_backend", "identity", "rewrite backend: identity|upper|http"},
      {"rewrite_url", "https://api.openai.com", "chat-completions base URL for the http backend"},
      {"rewrite_model", "gpt-3.5-turbo", "model name for the http backend"},
      {"rewrite_concurrency", 4, "concurrent rewrite requests"},
      {"rewrite_timeout", 60.0, "per-request timeout in seconds"},
      {"rewrite_retries", 3, "retries after a failed request"},
      {"log_level", "info", "log level: debug|info|warn|error|off"},
  };
  return specs;
}

std::string flag_name(const std::string& key) {
  std::string out = "--" + key;
  for (auto& c : out) {
    if (c == '_') c = '-';
  }
  return out;
}

namespace {

json convert(const std::string& key, const std::string& raw, const json& like) {
  try {
    std::size_t used = 0;
    if (like.is_boolean()) {
      if (raw == "true" || raw == "1") return true;
      if (raw == "false" || raw == "0") return false;
      throw std::invalid_argument(raw);
    }
    if (like.is_number_integer()) {
      if (!raw.empty() && raw[0] == '-') throw std::invalid_argument(raw);
      auto v = std::stoull(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
      return v;
    }
    if (like.is_number_float()) {
      auto v = std::stod(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
      return v;
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::ConfigError, "bad value '" + raw + "' for " + flag_name(key));
  }
  return raw;
}

// Integer settings are all non-negative; float settings accept integers.
bool compatible(const json& like, const json& value) {
  if (like.is_number_float()) return value.is_number();
  if (like.is_number_integer()) {
    return value.is_number_unsigned() || (value.is_number_integer() && value.get<long long>() >= 0);
  }
  return like.type() == value.type();
}

}  // namespace

json merge_settings(const std::optional<std::filesystem::path>& config_file,
                    const std::map<std::string, std::string>& flags) {
  json out = json::object();
  for (const auto& s : setting_specs()) out[s.key] = s.default_value;

  if (config_file) {
    std::ifstream in(*config_file);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + config_file->string());
    json file;
    try {
      file = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigError, "config " + config_file->string() + ": " + e.what());
    }
    if (!file.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (!out.contains(key)) throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
      if (!compatible(out[key], value)) {
        throw Error(ErrorCode::ConfigError, "config key '" + key + "' has the wrong type");
      }
      out[key] = value;
    }
  }
  for (const auto& [key, raw] : flags) {
    if (!out.contains(key)) throw Error(ErrorCode::ConfigError, "unknown setting '" + key + "'");
    out[key] = convert(key, raw, out[key]);
  }
  return out;
}

std::string PipelineConfig::effective_run_id() const {
  if (!run_id.empty()) return run_id;
  return model + "_" + std::string(pairs::to_string(family)) + "_k" + std::to_string(k) + "_" +
         std::string(pairs::to_string(source)) + "_s" + std::to_string(seed);
}

std::filesystem::path PipelineConfig::pairs_dir(std::size_t summary_k, pairs::Source data_source) const {
  auto dir = work_dir / ("pairs_k" + std::to_string(summary_k));
  return data_source == pairs::Source::Rewritten ? dir / "rewritten" : dir;
}

PipelineConfig pipeline_config(const json& s) {
  PipelineConfig c;
  auto str = [&](const char* key) { return s.at(key).get<std::string>(); };
  auto num = [&](const char* key) { return s.at(key).get<std::size_t>(); };
  c.gold = str("gold");
  c.automatic = str("auto");
  c.work_dir = str("work_dir");
  c.seed = s.at("seed").get<std::uint64_t>();
  c.split = {num("train"), num("validation"), num("test")};
  c.k = num("k");
  if (c.k == 0) throw Error(ErrorCode::ConfigError, "k must be at least 1");
  c.family = pairs::parse_family(str("family"));
  c.model = str("model");
  if (c.model != "tiny" && c.model != "echo") throw Error(ErrorCode::ConfigError, "unknown model '" + c.model + "'");
  try {
    c.source = pairs::parse_source(str("source"));
  } catch (const Error&) {
    throw Error(ErrorCode::ConfigError, "unknown source '" + str("source") + "'");
  }
  c.source_label = str("source_label");
  c.run_id = str("run_id");
  if (c.run_id.find_first_of("/\\") != std::string::npos || c.run_id == "." || c.run_id == "..") {
    throw Error(ErrorCode::ConfigError, "run_id must be a plain name");
  }

  c.labeler = str("labeler");
  if (c.labeler != "keyword" && c.labeler != "crf") {
    throw Error(ErrorCode::ConfigError, "unknown labeler '" + c.labeler + "'");
  }
  c.labeler_config.max_epochs = num("labeler_epochs");
  c.labeler_config.learning_rate = s.at("labeler_lr").get<double>();
  c.labeler_config.batch_size = num("labeler_batch");
  c.labeler_config.patience = num("labeler_patience");
  c.labeler_config.seed = c.seed;
  c.relabel_gold = s.at("relabel_gold").get<bool>();

  c.embedding_dim = num("embedding_dim");
  c.fine_tune.epochs = num("epochs");
  c.fine_tune.learning_rate = s.at("learning_rate").get<double>();
  c.fine_tune.batch_size = num("batch_size");
  c.fine_tune.seed = c.seed;
  c.fine_tune.max_tokens = num("max_tokens");
  if (c.fine_tune.epochs == 0 || c.fine_tune.batch_size == 0) {
    throw Error(ErrorCode::ConfigError, "epochs and batch_size must be at least 1");
  }
  c.tiny.hidden = num("hidden");
  c.tiny.max_vocab = num("max_vocab");
  c.generation.options.max_new_tokens = num("max_new_tokens");
  c.generation.options.beam_width = num("beam_width");
  c.generation.options.seed = c.seed;
  c.generation.threads = num("threads");
  c.overlap = evaluator::parse_overlap_mode(str("overlap"));

  c.rewrite_backend = str("rewrite_backend");
  c.rewrite_url = str("rewrite_url");
  c.rewrite_model = str("rewrite_model");
  c.rewrite_concurrency = num("rewrite_concurrency");
  c.rewrite_settings.timeout_seconds = s.at("rewrite_timeout").get<double>();
  c.rewrite_settings.max_retries = num("rewrite_retries");
  c.log_level = str("log_level");
  return c;
}

}  // namespace arggen::cli

#include "arggen/role_labeler.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <spdlog/spdlog.h>

#include "arggen/error.hpp"
#include "arggen/random.hpp"
#include "arggen/text.hpp"
#include "json_util.hpp"

namespace arggen::labeler {

namespace {

using corpus::CaseDocument;
using corpus::RhetoricalLabel;
using detail::json;

std::vector<std::string> sentence_texts(const CaseDocument& doc) {
  std::vector<std::string> out;
  out.reserve(doc.sentences.size());
  for (const auto& s : doc.sentences) out.push_back(s.text);
  return out;
}

std::vector<int> gold_codes(const CaseDocument& doc) {
  std::vector<int> out;
  out.reserve(doc.sentences.size());
  for (const auto& s : doc.sentences) {
    auto gold = s.gold();
    if (!gold) {
      throw Error(ErrorCode::MissingGoldLabel,
                  doc.doc_id + " sentence " + std::to_string(s.index) + " has no gold label");
    }
    out.push_back(corpus::label_code(*gold));
  }
  return out;
}

struct Snapshot {
  std::vector<double> encoder;
  crf::CrfParameters crf;
};

Snapshot snapshot(const LabelerModel& model) { return {model.encoder().parameters(), model.crf()}; }

void restore(LabelerModel& model, const Snapshot& s) {
  model.encoder().set_parameters(s.encoder);
  model.crf() = s.crf;
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j, Eigen::Index expected) {
  auto values = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != expected) {
    throw Error(ErrorCode::ShapeMismatch, "parameter vector has the wrong length");
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), expected);
}

struct KeywordRule {
  std::string_view needle;
  RhetoricalLabel label;
};

// Checked in order; the first match wins.
constexpr KeywordRule kKeywordRules[] = {
    {"held that", RhetoricalLabel::RatioOfDecision},
    {"in our opinion", RhetoricalLabel::RatioOfDecision},
    {"appeal is allowed", RhetoricalLabel::RulingPresent},
    {"appeal is dismissed", RhetoricalLabel::RulingPresent},
    {"we direct", RhetoricalLabel::RulingPresent},
    {"high court", RhetoricalLabel::RulingLower},
    {"trial court", RhetoricalLabel::RulingLower},
    {"lower court", RhetoricalLabel::RulingLower},
    {"section", RhetoricalLabel::Statute},
    {"article", RhetoricalLabel::Statute},
    {"relied on", RhetoricalLabel::Precedent},
    {"reported in", RhetoricalLabel::Precedent},
    {"counsel for", RhetoricalLabel::Argument},
    {"contended", RhetoricalLabel::Argument},
    {"submitted that", RhetoricalLabel::Argument},
};

}  // namespace

// --- features ---------------------------------------------------------------

HashedNgramFeatures::HashedNgramFeatures(std::size_t buckets) : buckets_(buckets) {
  if (buckets_ == 0) throw Error(ErrorCode::ConfigError, "hashed-ngrams needs at least one bucket");
}

std::string HashedNgramFeatures::config() const { return json{{"buckets", buckets_}}.dump(); }

FeatureVector HashedNgramFeatures::extract(std::string_view sentence) const {
  auto tokens = text::word_tokens(sentence);
  std::set<std::size_t> active;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    active.insert(text::fnv1a64(tokens[i]) % buckets_);
    if (i + 1 < tokens.size()) active.insert(text::fnv1a64(tokens[i] + " " + tokens[i + 1]) % buckets_);
  }
  FeatureVector out;
  out.reserve(active.size());
  for (auto idx : active) out.emplace_back(idx, 1.0);
  return out;
}

KeywordFeatures::KeywordFeatures(std::vector<std::string> keywords) {
  keywords_.reserve(keywords.size());
  for (auto& k : keywords) keywords_.push_back(text::to_lower(k));
}

std::string KeywordFeatures::config() const { return json{{"keywords", keywords_}}.dump(); }

FeatureVector KeywordFeatures::extract(std::string_view sentence) const {
  FeatureVector out;
  for (std::size_t i = 0; i < keywords_.size(); ++i) {
    if (text::contains_ci(sentence, keywords_[i])) out.emplace_back(i, 1.0);
  }
  return out;
}

// --- linear encoder ---------------------------------------------------------

LinearEncoder::LinearEncoder(std::unique_ptr<FeatureExtractor> features, std::size_t num_labels)
    : features_(std::move(features)), num_labels_(num_labels) {
  const auto L = static_cast<Eigen::Index>(num_labels_);
  const auto D = static_cast<Eigen::Index>(features_->dimension());
  weights_ = Eigen::MatrixXd::Zero(L, D);
  bias_ = Eigen::VectorXd::Zero(L);
  grad_weights_ = Eigen::MatrixXd::Zero(L, D);
  grad_bias_ = Eigen::VectorXd::Zero(L);
}

crf::EmissionMatrix LinearEncoder::encode(std::span<const std::string> sentences) const {
  crf::EmissionMatrix em(static_cast<Eigen::Index>(sentences.size()), static_cast<Eigen::Index>(num_labels_));
  for (std::size_t t = 0; t < sentences.size(); ++t) {
    Eigen::VectorXd row = bias_;
    for (auto [idx, value] : features_->extract(sentences[t])) {
      row += value * weights_.col(static_cast<Eigen::Index>(idx));
    }
    em.row(static_cast<Eigen::Index>(t)) = row.transpose();
  }
  return em;
}

std::string LinearEncoder::config() const {
  return json{{"features", features_->id()}, {"features_config", json::parse(features_->config())}}.dump();
}

void LinearEncoder::zero_gradient() {
  grad_weights_.setZero();
  grad_bias_.setZero();
}

void LinearEncoder::accumulate_gradient(std::span<const std::string> sentences,
                                        const Eigen::MatrixXd& d_emissions) {
  for (std::size_t t = 0; t < sentences.size(); ++t) {
    Eigen::VectorXd d = d_emissions.row(static_cast<Eigen::Index>(t)).transpose();
    grad_bias_ += d;
    for (auto [idx, value] : features_->extract(sentences[t])) {
      grad_weights_.col(static_cast<Eigen::Index>(idx)) += value * d;
    }
  }
}

void LinearEncoder::apply_gradient(double learning_rate) {
  weights_ -= learning_rate * grad_weights_;
  bias_ -= learning_rate * grad_bias_;
}

std::vector<double> LinearEncoder::parameters() const {
  std::vector<double> out(weights_.data(), weights_.data() + weights_.size());
  out.insert(out.end(), bias_.data(), bias_.data() + bias_.size());
  return out;
}

void LinearEncoder::set_parameters(std::span<const double> values) {
  if (values.size() != static_cast<std::size_t>(weights_.size() + bias_.size())) {
    throw Error(ErrorCode::ShapeMismatch, "encoder parameter count mismatch");
  }
  std::copy_n(values.begin(), weights_.size(), weights_.data());
  std::copy(values.begin() + weights_.size(), values.end(), bias_.data());
}

std::unique_ptr<SentenceEncoder> make_encoder(std::string_view id, std::string_view config_json,
                                              std::size_t num_labels) {
  auto cfg = detail::parse_json(config_json, 1);
  std::unique_ptr<FeatureExtractor> features;
  auto features_id = cfg.value("features", std::string());
  auto features_cfg = cfg.value("features_config", json::object());
  if (id == "linear+hashed-ngrams" || features_id == "hashed-ngrams") {
    features = std::make_unique<HashedNgramFeatures>(features_cfg.value("buckets", std::size_t{4096}));
  } else if (id == "linear+keywords" || features_id == "keywords") {
    features = std::make_unique<KeywordFeatures>(
        features_cfg.value("keywords", std::vector<std::string>{}));
  } else {
    throw Error(ErrorCode::ConfigError, "unknown sentence encoder '" + std::string(id) + "'");
  }
  return std::make_unique<LinearEncoder>(std::move(features), num_labels);
}

// --- model ------------------------------------------------------------------

LabelerModel::LabelerModel(std::unique_ptr<SentenceEncoder> encoder, crf::CrfParameters crf,
                           LabelerConfig config)
    : encoder_(std::move(encoder)), crf_(std::move(crf)), config_(config) {
  if (!encoder_) throw Error(ErrorCode::ConfigError, "labeler needs an encoder");
  if (encoder_->num_labels() != crf_.num_labels()) {
    throw Error(ErrorCode::ShapeMismatch, "encoder and CRF disagree on the label count");
  }
}

std::vector<int> LabelerModel::predict(std::span<const std::string> sentences) const {
  if (sentences.empty()) return {};
  return crf::viterbi_decode(encoder_->encode(sentences), crf_).labels;
}

void LabelerModel::save(const std::filesystem::path& path) const {
  const auto L = crf_.num_labels();
  json labels = json::array();
  for (std::size_t i = 0; i < L && i < corpus::kNumLabels; ++i) {
    labels.push_back(std::string(corpus::to_string(corpus::label_from_code(static_cast<int>(i)))));
  }
  json transitions = json::array();
  for (Eigen::Index i = 0; i < crf_.transitions.rows(); ++i) {
    transitions.push_back(vector_to_json(crf_.transitions.row(i).transpose()));
  }
  json artifact = {
      {"format", "arggen.labeler"},
      {"version", kLabelerFormatVersion},
      {"num_labels", L},
      {"labels", labels},
      {"encoder", {{"id", encoder_->id()}, {"config", json::parse(encoder_->config())}}},
      {"config",
       {{"batch_size", config_.batch_size},
        {"learning_rate", config_.learning_rate},
        {"max_epochs", config_.max_epochs},
        {"patience", config_.patience}}},
      {"seed", config_.seed},
      {"crf", {{"start", vector_to_json(crf_.start)}, {"stop", vector_to_json(crf_.stop)}, {"transitions", transitions}}},
      {"encoder_parameters", encoder_->parameters()},
  };
  detail::write_json_file(path, artifact);
}

LabelerModel LabelerModel::load(const std::filesystem::path& path) {
  auto j = detail::read_json_file(path);
  try {
    if (j.value("format", std::string()) != "arggen.labeler") {
      throw Error(ErrorCode::InvalidRecord, path.string() + " is not a labeler artifact");
    }
    if (j.value("version", 0) != kLabelerFormatVersion) {
      throw Error(ErrorCode::InvalidRecord, "unsupported labeler artifact version");
    }
    const auto L = j.at("num_labels").get<std::size_t>();
    const auto& enc = j.at("encoder");
    auto encoder = make_encoder(enc.at("id").get<std::string>(), enc.at("config").dump(), L);
    encoder->set_parameters(j.at("encoder_parameters").get<std::vector<double>>());

    auto crf = crf::CrfParameters::zeros(L);
    const auto& c = j.at("crf");
    crf.start = vector_from_json(c.at("start"), static_cast<Eigen::Index>(L));
    crf.stop = vector_from_json(c.at("stop"), static_cast<Eigen::Index>(L));
    const auto& rows = c.at("transitions");
    if (rows.size() != L) throw Error(ErrorCode::ShapeMismatch, "transition matrix has the wrong shape");
    for (std::size_t i = 0; i < L; ++i) {
      crf.transitions.row(static_cast<Eigen::Index>(i)) =
          vector_from_json(rows[i], static_cast<Eigen::Index>(L)).transpose();
    }

    LabelerConfig config;
    const auto& cfg = j.at("config");
    config.batch_size = cfg.at("batch_size").get<std::size_t>();
    config.learning_rate = cfg.at("learning_rate").get<double>();
    config.max_epochs = cfg.at("max_epochs").get<std::size_t>();
    config.patience = cfg.at("patience").get<std::size_t>();
    config.seed = j.at("seed").get<std::uint64_t>();
    return LabelerModel(std::move(encoder), std::move(crf), config);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidRecord, path.string() + ": " + e.what());
  }
}

// --- training ---------------------------------------------------------------

double sentence_accuracy(const LabelerModel& model, const std::vector<CaseDocument>& docs) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for (const auto& doc : docs) {
    if (doc.sentences.empty()) continue;
    auto predicted = model.predict(sentence_texts(doc));
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
      auto gold = doc.sentences[i].gold();
      if (!gold) continue;
      ++total;
      if (predicted[i] == corpus::label_code(*gold)) ++correct;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

TrainedLabeler train_labeler(const std::vector<CaseDocument>& train_docs,
                             const std::vector<CaseDocument>& validation_docs,
                             std::unique_ptr<SentenceEncoder> encoder, const LabelerConfig& config) {
  if (train_docs.empty()) throw Error(ErrorCode::MissingData, "no training documents");
  if (config.batch_size == 0 || config.max_epochs == 0) {
    throw Error(ErrorCode::ConfigError, "batch_size and max_epochs must be positive");
  }

  struct Example {
    std::vector<std::string> sentences;
    std::vector<int> gold;
  };
  std::vector<Example> examples;
  for (const auto& doc : train_docs) {
    if (doc.sentences.empty()) continue;
    examples.push_back({sentence_texts(doc), gold_codes(doc)});
  }
  if (examples.empty()) throw Error(ErrorCode::MissingData, "training documents have no sentences");

  const auto L = encoder->num_labels();
  LabelerModel model(std::move(encoder), crf::CrfParameters::zeros(L), config);
  const auto& selection_docs = validation_docs.empty() ? train_docs : validation_docs;

  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
  double best_accuracy = -1.0;
  Snapshot best = snapshot(model);
  std::size_t stagnant = 0;

  Rng rng(config.seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t end = std::min(order.size(), b + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - b);
      auto& enc = model.encoder();
      enc.zero_gradient();
      crf::Gradient total{Eigen::MatrixXd(), Eigen::MatrixXd::Zero(L, L), Eigen::VectorXd::Zero(L),
                          Eigen::VectorXd::Zero(L)};
      for (std::size_t k = b; k < end; ++k) {
        const auto& ex = examples[order[k]];
        auto res = crf::nll_and_gradient(enc.encode(ex.sentences), model.crf(), ex.gold);
        epoch_loss += res.loss;
        total.transitions += scale * res.gradient.transitions;
        total.start += scale * res.gradient.start;
        total.stop += scale * res.gradient.stop;
        enc.accumulate_gradient(ex.sentences, scale * res.gradient.emissions);
      }
      enc.apply_gradient(config.learning_rate);
      model.crf().transitions -= config.learning_rate * total.transitions;
      model.crf().start -= config.learning_rate * total.start;
      model.crf().stop -= config.learning_rate * total.stop;
    }

    EpochStats stats{epoch, epoch_loss / static_cast<double>(examples.size()),
                     sentence_accuracy(model, selection_docs)};
    history.push_back(stats);
    spdlog::debug("labeler epoch {} loss {:.6f} validation accuracy {:.4f}", epoch, stats.train_loss,
                  stats.validation_accuracy);

    if (stats.validation_accuracy > best_accuracy) {
      best_accuracy = stats.validation_accuracy;
      best_epoch = epoch;
      best = snapshot(model);
      stagnant = 0;
    } else if (++stagnant >= config.patience) {
      break;
    }
  }

  restore(model, best);
  return TrainedLabeler{std::move(model), std::move(history), best_epoch, best_accuracy};
}

corpus::CaseDocument label_document(const CaseDocument& doc, const LabelerModel& model) {
  if (doc.sentences.empty()) throw Error(ErrorCode::EmptyDocument, doc.doc_id + " has no sentences");
  auto predicted = model.predict(sentence_texts(doc));
  CaseDocument out = doc;
  for (std::size_t i = 0; i < out.sentences.size(); ++i) {
    auto& s = out.sentences[i];
    s.gold_label = s.gold();
    s.label = corpus::label_from_code(predicted[i]);
    s.label_source = corpus::LabelSource::Predicted;
  }
  return out;
}

std::vector<std::string> baseline_keywords() {
  std::vector<std::string> out;
  for (const auto& rule : kKeywordRules) out.emplace_back(rule.needle);
  return out;
}

RhetoricalLabel keyword_rule(std::string_view sentence) {
  for (const auto& rule : kKeywordRules) {
    if (text::contains_ci(sentence, rule.needle)) return rule.label;
  }
  return RhetoricalLabel::Facts;
}

corpus::CaseDocument keyword_baseline_labeler(const CaseDocument& doc) {
  CaseDocument out = doc;
  for (auto& s : out.sentences) {
    s.gold_label = s.gold();
    s.label = keyword_rule(s.text);
    s.label_source = corpus::LabelSource::Predicted;
  }
  return out;
}

}  // namespace arggen::labeler

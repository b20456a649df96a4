#include "arggen/tiny_lm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "arggen/corpus.hpp"
#include "arggen/error.hpp"
#include "arggen/random.hpp"
#include "arggen/text.hpp"
#include "json_util.hpp"

namespace arggen::generation {

namespace {

using detail::json;

constexpr int kUnk = 0;
constexpr int kBos = 1;
constexpr int kEos = 2;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kClipNorm = 5.0;

using Params = TinyLm::Parameters;

template <typename Fn>
void for_each_tensor(Params& a, const Params& b, Fn&& fn) {
  fn(a.prev1, b.prev1);
  fn(a.prev2, b.prev2);
  fn(a.context, b.context);
  fn(a.output, b.output);
}

Params zeros_like(const Params& p) {
  Params z;
  z.prev1 = Eigen::MatrixXd::Zero(p.prev1.rows(), p.prev1.cols());
  z.prev2 = Eigen::MatrixXd::Zero(p.prev2.rows(), p.prev2.cols());
  z.context = Eigen::MatrixXd::Zero(p.context.rows(), p.context.cols());
  z.hidden_bias = Eigen::VectorXd::Zero(p.hidden_bias.size());
  z.output = Eigen::MatrixXd::Zero(p.output.rows(), p.output.cols());
  z.output_bias = Eigen::VectorXd::Zero(p.output_bias.size());
  return z;
}

double squared_norm(const Params& g) {
  return g.prev1.squaredNorm() + g.prev2.squaredNorm() + g.context.squaredNorm() + g.hidden_bias.squaredNorm() +
         g.output.squaredNorm() + g.output_bias.squaredNorm() + g.copy * g.copy + g.recent * g.recent;
}

void scale(Params& g, double s) {
  g.prev1 *= s;
  g.prev2 *= s;
  g.context *= s;
  g.hidden_bias *= s;
  g.output *= s;
  g.output_bias *= s;
  g.copy *= s;
  g.recent *= s;
}

class Adam {
 public:
  explicit Adam(const Params& shape) : m_(zeros_like(shape)), v_(zeros_like(shape)) {}

  void step(Params& p, const Params& g, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t_));
    auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
      m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * grad;
      v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * grad.cwiseProduct(grad);
      param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kAdamEps);
    };
    update(p.prev1, m_.prev1, v_.prev1, g.prev1);
    update(p.prev2, m_.prev2, v_.prev2, g.prev2);
    update(p.context, m_.context, v_.context, g.context);
    update(p.hidden_bias, m_.hidden_bias, v_.hidden_bias, g.hidden_bias);
    update(p.output, m_.output, v_.output, g.output);
    update(p.output_bias, m_.output_bias, v_.output_bias, g.output_bias);
    auto scalar = [&](double& param, double& m, double& v, double grad) {
      m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * grad;
      v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * grad * grad;
      param -= lr * (m / c1) / (std::sqrt(v / c2) + kAdamEps);
    };
    scalar(p.copy, m_.copy, v_.copy, g.copy);
    scalar(p.recent, m_.recent, v_.recent, g.recent);
  }

 private:
  Params m_;
  Params v_;
  std::size_t t_ = 0;
};

// Log-softmax in place; returns log-probabilities.
Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return logits.array() - lse;
}

void write_matrix(std::ofstream& out, const Eigen::MatrixXd& m) {
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
}

void read_matrix(std::ifstream& in, Eigen::MatrixXd& m) {
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!in) throw Error(ErrorCode::InvalidRecord, "truncated tiny-lm parameter file");
}

void check_family(const TrainingSet& data, Family family) {
  if (std::holds_alternative<std::vector<std::string>>(data) != (family == Family::Causal)) {
    throw Error(ErrorCode::InvalidRecord,
                "training set does not match the " + std::string(pairs::to_string(family)) + " family");
  }
}

}  // namespace

TinyLm::TinyLm(Family family, TinyLmConfig config) : family_(family), config_(config) {
  if (config_.hidden == 0 || config_.max_vocab < 4) {
    throw Error(ErrorCode::ConfigError, "tiny-lm needs hidden >= 1 and max_vocab >= 4");
  }
}

std::string TinyLm::model_id() const { return family_ == Family::Causal ? "tiny-causal" : "tiny-seq2seq"; }

std::size_t TinyLm::count_tokens(std::string_view text) const { return corpus::count_words(text); }

std::vector<int> TinyLm::encode(std::string_view text) const {
  std::vector<int> out;
  for (const auto& w : text::split_whitespace(text)) {
    auto it = ids_.find(w);
    out.push_back(it == ids_.end() ? kUnk : it->second);
  }
  return out;
}

void TinyLm::prepare(const TrainingSet& train, std::uint64_t seed) {
  check_family(train, family_);
  std::map<std::string, std::size_t> freq;
  auto count = [&](std::string_view s) {
    for (auto& w : text::split_whitespace(s)) ++freq[w];
  };
  if (family_ == Family::Causal) {
    for (const auto& s : std::get<std::vector<std::string>>(train)) count(s);
  } else {
    for (const auto& st : std::get<std::vector<SourceTarget>>(train)) {
      count(st.source);
      count(st.target);
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  vocab_ = {"<unk>", "<bos>", "<eos>"};
  for (const auto& [w, n] : ranked) {
    if (vocab_.size() >= config_.max_vocab) break;
    vocab_.push_back(w);
  }
  ids_.clear();
  for (std::size_t i = 0; i < vocab_.size(); ++i) ids_[vocab_[i]] = static_cast<int>(i);

  const auto V = static_cast<Eigen::Index>(vocab_.size());
  const auto H = static_cast<Eigen::Index>(config_.hidden);
  Rng rng(seed);
  auto random = [&](Eigen::Index rows, Eigen::Index cols, double range) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-range, range);
    }
    return m;
  };
  params_.prev1 = random(V, H, 0.1);
  params_.prev2 = random(V, H, 0.1);
  params_.context = random(V, H, 0.1);
  params_.hidden_bias = Eigen::VectorXd::Zero(H);
  params_.output = random(V, H, 0.1);
  params_.output_bias = Eigen::VectorXd::Zero(V);
  params_.copy = 0.0;
  params_.recent = 0.0;
}

std::vector<TinyLm::Sequence> TinyLm::sequences(const TrainingSet& data) const {
  check_family(data, family_);
  std::vector<Sequence> out;
  auto unique_context = [](const std::vector<int>& ids, std::size_t first_step, bool grows, Sequence& seq) {
    std::vector<bool> seen;
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const auto id = static_cast<std::size_t>(ids[j]);
      if (seen.size() <= id) seen.resize(id + 1, false);
      if (seen[id]) continue;
      seen[id] = true;
      seq.context_tokens.push_back(ids[j]);
      seq.enters.push_back(grows ? j + first_step : first_step);
    }
  };
  if (family_ == Family::Causal) {
    for (const auto& s : std::get<std::vector<std::string>>(data)) {
      Sequence seq;
      auto ids = encode(s);
      seq.tokens.push_back(kBos);
      seq.tokens.insert(seq.tokens.end(), ids.begin(), ids.end());
      seq.tokens.push_back(kEos);
      // Token ids[j] sits at position j + 1 and is visible from step j + 2.
      unique_context(ids, 2, true, seq);
      out.push_back(std::move(seq));
    }
  } else {
    for (const auto& st : std::get<std::vector<SourceTarget>>(data)) {
      Sequence seq;
      auto target = encode(st.target);
      seq.tokens.push_back(kBos);
      seq.tokens.insert(seq.tokens.end(), target.begin(), target.end());
      seq.tokens.push_back(kEos);
      unique_context(encode(st.source), 1, false, seq);
      out.push_back(std::move(seq));
    }
  }
  return out;
}

double TinyLm::sequence_loss(const Sequence& seq, Parameters* grad) const {
  const auto H = static_cast<Eigen::Index>(config_.hidden);
  const std::size_t T = seq.tokens.size();
  const std::size_t C = seq.context_tokens.size();

  // Context tokens ordered by the step they become visible.
  std::vector<std::size_t> order(C);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return seq.enters[a] < seq.enters[b]; });

  Eigen::VectorXd context_sum = Eigen::VectorXd::Zero(H);
  std::size_t visible = 0;
  std::vector<Eigen::VectorXd> per_step;  // dpre / |C_t| for the suffix sums
  if (grad) per_step.assign(T + 1, Eigen::VectorXd::Zero(H));

  double loss = 0.0;
  for (std::size_t t = 1; t < T; ++t) {
    while (visible < C && seq.enters[order[visible]] <= t) {
      context_sum += params_.context.row(seq.context_tokens[order[visible]]).transpose();
      ++visible;
    }
    const int p1 = seq.tokens[t - 1];
    const int p2 = t >= 2 ? seq.tokens[t - 2] : kBos;
    Eigen::VectorXd pre = params_.prev1.row(p1).transpose() + params_.prev2.row(p2).transpose() + params_.hidden_bias;
    if (visible > 0) pre += context_sum / static_cast<double>(visible);
    Eigen::VectorXd h = pre.array().tanh();

    Eigen::VectorXd logits = params_.output * h + params_.output_bias;
    for (std::size_t c = 0; c < visible; ++c) logits(seq.context_tokens[order[c]]) += params_.copy;
    std::vector<int> recent;
    for (std::size_t back = 1; back <= config_.recent_window && back < t; ++back) {
      const int w = seq.tokens[t - back];
      if (std::find(recent.begin(), recent.end(), w) == recent.end()) recent.push_back(w);
    }
    for (int w : recent) logits(w) += params_.recent;

    Eigen::VectorXd logp = log_softmax(logits);
    const int y = seq.tokens[t];
    loss -= logp(y);
    if (!grad) continue;

    Eigen::VectorXd dlogits = logp.array().exp();
    dlogits(y) -= 1.0;
    grad->output.noalias() += dlogits * h.transpose();
    grad->output_bias += dlogits;
    for (std::size_t c = 0; c < visible; ++c) grad->copy += dlogits(seq.context_tokens[order[c]]);
    for (int w : recent) grad->recent += dlogits(w);

    Eigen::VectorXd dpre = (params_.output.transpose() * dlogits).array() * (1.0 - h.array().square());
    grad->prev1.row(p1) += dpre.transpose();
    grad->prev2.row(p2) += dpre.transpose();
    grad->hidden_bias += dpre;
    if (visible > 0) per_step[t] = dpre / static_cast<double>(visible);
  }

  if (grad && C > 0) {
    // A context token visible from step e receives the sum of per-step terms for t >= e.
    for (std::size_t t = T; t-- > 1;) per_step[t - 1] += per_step[t];
    for (std::size_t c = 0; c < C; ++c) {
      const auto e = seq.enters[c];
      if (e < T) grad->context.row(seq.context_tokens[c]) += per_step[e].transpose();
    }
  }
  return loss;
}

double TinyLm::evaluate_loss(const TrainingSet& data) const {
  if (!prepared()) throw Error(ErrorCode::MissingData, "tiny-lm has no vocabulary yet");
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& seq : sequences(data)) {
    total += sequence_loss(seq, nullptr);
    tokens += seq.tokens.size() - 1;
  }
  return tokens == 0 ? 0.0 : total / static_cast<double>(tokens);
}

double TinyLm::loss_and_gradient(const TrainingSet& data, Parameters& grad) const {
  if (!prepared()) throw Error(ErrorCode::MissingData, "tiny-lm has no vocabulary yet");
  grad = zeros_like(params_);
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& seq : sequences(data)) {
    total += sequence_loss(seq, &grad);
    tokens += seq.tokens.size() - 1;
  }
  if (tokens == 0) return 0.0;
  scale(grad, 1.0 / static_cast<double>(tokens));
  return total / static_cast<double>(tokens);
}

std::vector<double> TinyLm::fine_tune(const TrainingSet& train, const TrainingSet& validation,
                                      const FineTuneConfig& config) {
  check_family(train, family_);
  check_family(validation, family_);
  if (config.epochs == 0 || config.batch_size == 0) {
    throw Error(ErrorCode::ConfigError, "epochs and batch_size must be at least 1");
  }
  if (!prepared()) prepare(train, config.seed);

  auto train_seqs = sequences(train);
  if (train_seqs.empty()) throw Error(ErrorCode::MissingData, "no training examples");
  const bool has_validation = std::visit([](const auto& v) { return !v.empty(); }, validation);

  Adam adam(params_);
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train_seqs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> losses;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const auto end = std::min(order.size(), b + config.batch_size);
      Params grad = zeros_like(params_);
      std::size_t tokens = 0;
      for (std::size_t i = b; i < end; ++i) {
        sequence_loss(train_seqs[order[i]], &grad);
        tokens += train_seqs[order[i]].tokens.size() - 1;
      }
      scale(grad, 1.0 / static_cast<double>(std::max<std::size_t>(tokens, 1)));
      const double norm = std::sqrt(squared_norm(grad));
      if (norm > kClipNorm) scale(grad, kClipNorm / norm);
      adam.step(params_, grad, config.learning_rate);
    }
    losses.push_back(evaluate_loss(has_validation ? validation : train));
  }
  return losses;
}

std::string TinyLm::generate(std::string_view prompt, const GenerateOptions& options) const {
  if (!prepared()) return {};
  const auto V = static_cast<Eigen::Index>(vocab_.size());
  const auto H = static_cast<Eigen::Index>(config_.hidden);
  const std::size_t width = std::max<std::size_t>(1, options.beam_width);

  struct Beam {
    std::vector<int> tokens;  // decoder tokens including BOS (and prompt for causal)
    std::vector<char> in_context;
    Eigen::VectorXd context_sum;
    std::size_t visible = 0;
    std::size_t generated = 0;
    double logprob = 0.0;
    bool finished = false;
  };

  auto add_context = [&](Beam& beam, int id) {
    if (beam.in_context[static_cast<std::size_t>(id)]) return;
    beam.in_context[static_cast<std::size_t>(id)] = 1;
    beam.context_sum += params_.context.row(id).transpose();
    ++beam.visible;
  };

  Beam start;
  start.in_context.assign(static_cast<std::size_t>(V), 0);
  start.context_sum = Eigen::VectorXd::Zero(H);
  start.tokens.push_back(kBos);
  for (int id : encode(prompt)) {
    add_context(start, id);
    if (family_ == Family::Causal) start.tokens.push_back(id);
  }

  auto step_logp = [&](const Beam& beam) {
    const std::size_t t = beam.tokens.size();
    const int p1 = beam.tokens[t - 1];
    const int p2 = t >= 2 ? beam.tokens[t - 2] : kBos;
    Eigen::VectorXd pre = params_.prev1.row(p1).transpose() + params_.prev2.row(p2).transpose() + params_.hidden_bias;
    if (beam.visible > 0) pre += beam.context_sum / static_cast<double>(beam.visible);
    Eigen::VectorXd h = pre.array().tanh();
    Eigen::VectorXd logits = params_.output * h + params_.output_bias;
    for (Eigen::Index w = 0; w < V; ++w) {
      if (beam.in_context[static_cast<std::size_t>(w)]) logits(w) += params_.copy;
    }
    std::vector<int> recent;
    for (std::size_t back = 1; back <= config_.recent_window && back < t; ++back) {
      const int w = beam.tokens[t - back];
      if (std::find(recent.begin(), recent.end(), w) == recent.end()) recent.push_back(w);
    }
    for (int w : recent) logits(w) += params_.recent;
    Eigen::VectorXd logp = log_softmax(logits);
    logp(kUnk) = -std::numeric_limits<double>::infinity();
    logp(kBos) = -std::numeric_limits<double>::infinity();
    return logp;
  };

  std::vector<Beam> beams{start};
  for (std::size_t step = 0; step < options.max_new_tokens; ++step) {
    struct Candidate {
      double score;
      std::size_t beam;
      int token;
    };
    std::vector<Candidate> candidates;
    bool any_active = false;
    for (std::size_t b = 0; b < beams.size(); ++b) {
      if (beams[b].finished) {
        candidates.push_back({beams[b].logprob, b, -1});
        continue;
      }
      any_active = true;
      auto logp = step_logp(beams[b]);
      std::vector<int> ids(static_cast<std::size_t>(V));
      std::iota(ids.begin(), ids.end(), 0);
      const auto keep = std::min<std::size_t>(width, ids.size());
      std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(keep), ids.end(),
                        [&](int a, int c) { return logp(a) > logp(c) || (logp(a) == logp(c) && a < c); });
      for (std::size_t i = 0; i < keep; ++i) candidates.push_back({beams[b].logprob + logp(ids[i]), b, ids[i]});
    }
    if (!any_active) break;
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& c) {
      if (a.score != c.score) return a.score > c.score;
      if (a.beam != c.beam) return a.beam < c.beam;
      return a.token < c.token;
    });
    std::vector<Beam> next;
    for (const auto& cand : candidates) {
      if (next.size() >= width) break;
      Beam beam = beams[cand.beam];
      if (cand.token >= 0) {
        beam.logprob = cand.score;
        ++beam.generated;
        if (cand.token == kEos) {
          beam.finished = true;
        } else {
          beam.tokens.push_back(cand.token);
          if (family_ == Family::Causal) add_context(beam, cand.token);
        }
      }
      next.push_back(std::move(beam));
    }
    beams = std::move(next);
  }

  // Length-normalised score picks among the surviving hypotheses.
  const Beam* best = &beams.front();
  auto normalised = [](const Beam& b) { return b.generated ? b.logprob / static_cast<double>(b.generated) : 0.0; };
  for (const auto& b : beams) {
    if (width > 1 && normalised(b) > normalised(*best)) best = &b;
  }
  const std::size_t prompt_len = best->tokens.size() - best->generated + (best->finished ? 1 : 0);
  std::vector<std::string> words;
  for (std::size_t i = prompt_len; i < best->tokens.size(); ++i) words.push_back(vocab_[static_cast<std::size_t>(best->tokens[i])]);
  return text::join(words, " ");
}

void TinyLm::save(const std::filesystem::path& checkpoint) const {
  std::filesystem::create_directories(checkpoint);
  json meta = {
      {"format", "arggen.tiny-lm"},
      {"version", 1},
      {"family", std::string(pairs::to_string(family_))},
      {"hidden", config_.hidden},
      {"max_vocab", config_.max_vocab},
      {"recent_window", config_.recent_window},
      {"vocab", vocab_},
      {"copy", params_.copy},
      {"recent", params_.recent},
  };
  detail::write_json_file(checkpoint / "meta.json", meta);
  std::ofstream out(checkpoint / "params.bin", std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + (checkpoint / "params.bin").string());
  write_matrix(out, params_.prev1);
  write_matrix(out, params_.prev2);
  write_matrix(out, params_.context);
  write_matrix(out, params_.hidden_bias);
  write_matrix(out, params_.output);
  write_matrix(out, params_.output_bias);
}

void TinyLm::load(const std::filesystem::path& checkpoint) {
  auto meta = detail::read_json_file(checkpoint / "meta.json");
  if (meta.value("format", std::string()) != "arggen.tiny-lm") {
    throw Error(ErrorCode::InvalidRecord, checkpoint.string() + " is not a tiny-lm checkpoint");
  }
  if (pairs::parse_family(meta.at("family").get<std::string>()) != family_) {
    throw Error(ErrorCode::InvalidRecord, checkpoint.string() + " holds a " +
                                              meta.at("family").get<std::string>() + " model, expected " +
                                              std::string(pairs::to_string(family_)));
  }
  config_.hidden = meta.at("hidden").get<std::size_t>();
  config_.max_vocab = meta.at("max_vocab").get<std::size_t>();
  config_.recent_window = meta.at("recent_window").get<std::size_t>();
  vocab_ = meta.at("vocab").get<std::vector<std::string>>();
  ids_.clear();
  for (std::size_t i = 0; i < vocab_.size(); ++i) ids_[vocab_[i]] = static_cast<int>(i);

  const auto V = static_cast<Eigen::Index>(vocab_.size());
  const auto H = static_cast<Eigen::Index>(config_.hidden);
  params_.prev1.resize(V, H);
  params_.prev2.resize(V, H);
  params_.context.resize(V, H);
  params_.hidden_bias.resize(H);
  params_.output.resize(V, H);
  params_.output_bias.resize(V);
  std::ifstream in(checkpoint / "params.bin", std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + (checkpoint / "params.bin").string());
  read_matrix(in, params_.prev1);
  read_matrix(in, params_.prev2);
  read_matrix(in, params_.context);
  Eigen::MatrixXd hb(H, 1);
  read_matrix(in, hb);
  params_.hidden_bias = hb.col(0);
  read_matrix(in, params_.output);
  Eigen::MatrixXd ob(V, 1);
  read_matrix(in, ob);
  params_.output_bias = ob.col(0);
  params_.copy = meta.at("copy").get<double>();
  params_.recent = meta.at("recent").get<double>();
}

}  // namespace arggen::generation

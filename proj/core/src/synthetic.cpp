#include "arggen/synthetic.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "arggen/error.hpp"
#include "arggen/text.hpp"
#include "json_util.hpp"

namespace arggen::synthetic {

using corpus::RhetoricalLabel;

namespace {

constexpr std::array kNames = {"Ramesh", "Sunita", "Arjun",  "Meena",  "Hari",   "Kavita", "Suresh",
                               "Lakshmi", "Vikram", "Anita", "Mohan",  "Geeta",  "Prakash", "Radha",
                               "Dinesh", "Usha",   "Gopal",  "Savitri", "Naresh", "Pooja"};
constexpr std::array kPlaces = {"Pune",  "Nagpur",  "Indore", "Jaipur", "Lucknow", "Patna",
                                "Bhopal", "Mysore", "Surat",  "Kanpur", "Agra",    "Nashik"};
constexpr std::array kActs = {"Transfer of Property Act", "Indian Contract Act", "Specific Relief Act",
                              "Industrial Disputes Act", "Rent Control Act", "Land Acquisition Act"};
constexpr std::array kMonths = {"January", "March", "May", "July", "September", "November"};

template <typename Array>
std::string pick(const Array& values, Rng& rng) {
  return values[rng.uniform_index(values.size())];
}

std::string year(Rng& rng) { return std::to_string(1975 + rng.uniform_index(40)); }
std::string date(Rng& rng) {
  return std::to_string(1 + rng.uniform_index(28)) + " " + pick(kMonths, rng) + " " + year(rng);
}
std::string amount(Rng& rng) { return std::to_string(5 + rng.uniform_index(95)) + "000"; }

std::string fill(std::string_view pattern, Rng& rng) {
  std::string a = pick(kNames, rng);
  std::string b = pick(kNames, rng);
  while (b == a) b = pick(kNames, rng);
  std::string out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] != '{' || i + 2 >= pattern.size() || pattern[i + 2] != '}') {
      out += pattern[i];
      continue;
    }
    switch (pattern[i + 1]) {
      case 'A': out += a; break;
      case 'B': out += b; break;
      case 'P': out += pick(kPlaces, rng); break;
      case 'D': out += date(rng); break;
      case 'Y': out += year(rng); break;
      case 'M': out += amount(rng); break;
      case 'S': out += std::to_string(2 + rng.uniform_index(150)); break;
      case 'L': out += pick(kActs, rng); break;
      default: throw Error(ErrorCode::ConfigError, "bad template slot");
    }
    i += 2;
  }
  return out;
}

const std::vector<std::string_view>& patterns(RhetoricalLabel label) {
  static const std::vector<std::string_view> facts = {
      "The appellant {A} purchased agricultural land in {P} on {D}.",
      "On {D} the respondent {B} lodged a complaint at the {P} police station.",
      "The property was registered in the name of {A} in {Y}.",
      "A notice was served on {B} demanding payment of {M} rupees.",
      "{A} had been employed as a clerk in the {P} municipal office since {Y}.",
      "The family of {A} occupied the disputed house in {P} for many years.",
      "{B} issued a cheque for {M} rupees which was returned unpaid.",
      "The parties entered into an agreement on {D} for the supply of cotton.",
  };
  static const std::vector<std::string_view> ruling_lower = {
      "The High Court dismissed the writ petition filed by {A}.",
      "The trial court decreed the suit in favour of {B}.",
      "The lower court found that {A} had failed to prove possession.",
  };
  static const std::vector<std::string_view> argument = {
      "Counsel for the appellant argued that the notice to {B} was defective.",
      "It was contended by {B} that the agreement had been cancelled in {Y}.",
      "The respondent submitted that {A} never paid the balance of {M} rupees.",
  };
  static const std::vector<std::string_view> statute = {
      "Section {S} of the {L} governs the transfer in question.",
      "The claim of {A} rests on Article {S} of the Constitution.",
      "The provisions of Section {S} of the {L} were applicable to the lease.",
  };
  static const std::vector<std::string_view> precedent = {
      "The appellant relied on an earlier decision concerning tenancy in {P}.",
      "The principle was reported in a judgment of {Y} involving similar facts.",
      "The respondent relied on the ruling given in the matter of {B} and others.",
  };
  static const std::vector<std::string_view> ratio = {
      "We have held that possession for twelve years by {A} creates a valid title.",
      "In our opinion the cancellation of the agreement by {B} was not lawful.",
      "It must be held that the notice issued in {Y} was sufficient.",
      "In our opinion {A} acted in good faith throughout the transaction.",
      "We are of the view and have held that the cheque for {M} rupees created a liability.",
  };
  static const std::vector<std::string_view> ruling_present = {
      "The appeal is allowed with costs.",
      "The appeal is dismissed and the order under challenge stands.",
      "We direct the respondent to pay {M} rupees to {A} within three months.",
  };
  switch (label) {
    case RhetoricalLabel::Facts: return facts;
    case RhetoricalLabel::RulingLower: return ruling_lower;
    case RhetoricalLabel::Argument: return argument;
    case RhetoricalLabel::Statute: return statute;
    case RhetoricalLabel::Precedent: return precedent;
    case RhetoricalLabel::RatioOfDecision: return ratio;
    case RhetoricalLabel::RulingPresent: return ruling_present;
  }
  return facts;
}

corpus::CaseDocument gold_document(std::string id, const std::vector<RhetoricalLabel>& labels, Rng& rng) {
  corpus::CaseDocument doc;
  doc.doc_id = std::move(id);
  doc.provenance = corpus::Provenance::GoldAnnotated;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    corpus::SentenceRecord s;
    s.index = i;
    s.text = sentence_for(labels[i], rng);
    s.label = labels[i];
    s.label_source = corpus::LabelSource::Gold;
    doc.sentences.push_back(std::move(s));
  }
  return doc;
}

std::vector<RhetoricalLabel> judgment_layout(Rng& rng, std::size_t min_role) {
  std::vector<RhetoricalLabel> labels;
  auto repeat = [&](RhetoricalLabel l, std::size_t lo, std::size_t hi) {
    const auto n = lo + rng.uniform_index(hi - lo + 1);
    labels.insert(labels.end(), n, l);
  };
  repeat(RhetoricalLabel::Facts, min_role, min_role + 4);
  repeat(RhetoricalLabel::RulingLower, 1, 2);
  repeat(RhetoricalLabel::Argument, 1, 4);
  repeat(RhetoricalLabel::Statute, 0, 2);
  repeat(RhetoricalLabel::Precedent, 0, 2);
  repeat(RhetoricalLabel::RatioOfDecision, min_role, min_role + 3);
  repeat(RhetoricalLabel::RulingPresent, 1, 1);
  return labels;
}

std::string doc_name(std::string_view prefix, std::size_t i) {
  std::string n = std::to_string(i + 1);
  return std::string(prefix) + std::string(3 - std::min<std::size_t>(3, n.size()), '0') + n;
}

}  // namespace

std::string sentence_for(RhetoricalLabel label, Rng& rng) {
  const auto& options = patterns(label);
  return fill(options[rng.uniform_index(options.size())], rng);
}

std::vector<corpus::CaseDocument> separable_corpus(std::size_t docs, std::uint64_t seed, std::size_t min_sentences,
                                                   std::size_t max_sentences) {
  if (min_sentences == 0 || max_sentences < min_sentences) {
    throw Error(ErrorCode::ConfigError, "bad sentence range for the separable corpus");
  }
  Rng rng(seed);
  std::vector<corpus::CaseDocument> out;
  for (std::size_t d = 0; d < docs; ++d) {
    const auto n = min_sentences + rng.uniform_index(max_sentences - min_sentences + 1);
    std::vector<RhetoricalLabel> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back(corpus::label_from_code(static_cast<int>(rng.uniform_index(corpus::kNumLabels))));
    out.push_back(gold_document(doc_name("sep-", d), labels, rng));
  }
  return out;
}

BundledCorpus bundled_corpus(std::uint64_t seed, std::size_t gold_docs, std::size_t auto_docs,
                             std::size_t min_role_sentences) {
  Rng rng(seed);
  BundledCorpus out;
  for (std::size_t d = 0; d < gold_docs; ++d) {
    out.gold.push_back(gold_document(doc_name("gold-", d), judgment_layout(rng, min_role_sentences), rng));
  }
  for (std::size_t d = 0; d < auto_docs; ++d) {
    std::vector<std::string> sentences;
    for (auto label : judgment_layout(rng, min_role_sentences)) sentences.push_back(sentence_for(label, rng));
    out.automatic.push_back({doc_name("auto-", d), text::join(sentences, " ")});
  }
  return out;
}

void write_bundled_corpus(const std::filesystem::path& dir, const BundledCorpus& bundle) {
  std::string gold;
  for (const auto& doc : bundle.gold) gold += corpus::to_json_line(doc) + "\n";
  detail::write_text_file(dir / "gold.jsonl", gold);
  for (const auto& raw : bundle.automatic) detail::write_text_file(dir / "auto" / (raw.doc_id + ".txt"), raw.text + "\n");
}

std::vector<pairs::FactArgumentPair> templated_pairs(std::size_t count, std::uint64_t seed,
                                                     const std::string& id_prefix) {
  struct Template {
    std::string_view facts;
    std::string_view argument;
  };
  static const std::array<Template, 3> templates = {{
      {"{A} agreed to sell a house in {P} to {B} in {Y}. {B} paid {M} rupees as advance. {A} later refused to "
       "execute the sale deed.",
       "{B} is entitled to specific performance of the agreement for the house in {P} and {A} must execute the "
       "sale deed."},
      {"{A} leased a shop in {P} to {B} in {Y}. The rent of {M} rupees remained unpaid for two years. {A} sought "
       "eviction of {B}.",
       "{B} defaulted on the rent of {M} rupees and {A} may recover possession of the shop in {P}."},
      {"{A} worked as a clerk in the {P} office from {Y}. {A} was dismissed by {B} without any inquiry. {A} "
       "claimed arrears of {M} rupees.",
       "The dismissal of {A} by {B} was illegal and the arrears of {M} rupees must be paid to {A}."},
  }};
  Rng rng(seed);
  std::vector<pairs::FactArgumentPair> out;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& t = templates[rng.uniform_index(templates.size())];
    // Both texts share one draw of the entity slots.
    std::string slots[6] = {pick(kNames, rng), "", pick(kPlaces, rng), year(rng), amount(rng)};
    do {
      slots[1] = pick(kNames, rng);
    } while (slots[1] == slots[0]);
    auto render = [&](std::string_view pattern) {
      std::string s;
      for (std::size_t j = 0; j < pattern.size(); ++j) {
        if (pattern[j] == '{' && j + 2 < pattern.size() && pattern[j + 2] == '}') {
          const std::string_view keys = "ABPYM";
          s += slots[keys.find(pattern[j + 1])];
          j += 2;
        } else {
          s += pattern[j];
        }
      }
      return s;
    };
    pairs::FactArgumentPair p;
    p.doc_id = doc_name(id_prefix + "-", i);
    p.facts_summary = render(t.facts);
    p.argument_summary = render(t.argument);
    p.k = 3;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace arggen::synthetic

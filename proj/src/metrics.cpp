#include "mframes/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "json.hpp"
#include "mframes/errors.hpp"

namespace mframes::metrics {

double round2(double pct) { return std::round(pct * 100.0) / 100.0; }

namespace {

std::string fmt2(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << round2(v);
  return os.str();
}

}  // namespace

EvalReport classification_report(const std::vector<Prediction>& preds,
                                 const std::vector<std::string>& labels) {
  if (preds.empty()) throw DataError("classification_report: empty input");
  std::map<std::string, int> label_index;
  for (std::size_t i = 0; i < labels.size(); ++i)
    label_index[labels[i]] = static_cast<int>(i);

  std::vector<int> tp(labels.size(), 0);
  std::vector<int> fp(labels.size(), 0);
  std::vector<int> fn(labels.size(), 0);
  std::vector<int> support(labels.size(), 0);
  int correct = 0;
  int abstained = 0;

  for (const Prediction& p : preds) {
    auto git = label_index.find(p.gold);
    if (git == label_index.end())
      throw DataError("classification_report: gold label not in label set: " +
                      p.gold);
    int g = git->second;
    ++support[static_cast<std::size_t>(g)];
    if (!p.pred.has_value()) {
      // abstention: wrong for every class, a miss for the gold class
      ++abstained;
      ++fn[static_cast<std::size_t>(g)];
      continue;
    }
    auto pit = label_index.find(*p.pred);
    if (pit == label_index.end())
      throw DataError("classification_report: predicted label not in label "
                      "set: " + *p.pred);
    int pr = pit->second;
    if (pr == g) {
      ++tp[static_cast<std::size_t>(g)];
      ++correct;
    } else {
      ++fp[static_cast<std::size_t>(pr)];
      ++fn[static_cast<std::size_t>(g)];
    }
  }

  EvalReport rep;
  rep.total = static_cast<int>(preds.size());
  rep.abstained = abstained;
  double macro_p = 0.0, macro_r = 0.0, macro_f = 0.0;
  double wsum_p = 0.0, wsum_r = 0.0, wsum_f = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ClassReport cr;
    cr.label = labels[i];
    cr.support = support[i];
    double denom_p = tp[i] + fp[i];
    double denom_r = tp[i] + fn[i];
    double p = denom_p > 0 ? 100.0 * tp[i] / denom_p : 0.0;
    double r = denom_r > 0 ? 100.0 * tp[i] / denom_r : 0.0;
    double f = (p + r) > 0 ? 2.0 * p * r / (p + r) : 0.0;
    cr.precision = round2(p);
    cr.recall = round2(r);
    cr.f1 = round2(f);
    macro_p += p;
    macro_r += r;
    macro_f += f;
    wsum_p += p * support[i];
    wsum_r += r * support[i];
    wsum_f += f * support[i];
    rep.per_class.push_back(std::move(cr));
  }
  double n_labels = static_cast<double>(labels.size());
  rep.accuracy = round2(100.0 * correct / static_cast<double>(preds.size()));
  rep.macro_avg = {"Macro Average", round2(macro_p / n_labels),
                   round2(macro_r / n_labels), round2(macro_f / n_labels),
                   rep.total};
  rep.weighted_avg = {"Weighted Average", round2(wsum_p / rep.total),
                      round2(wsum_r / rep.total), round2(wsum_f / rep.total),
                      rep.total};
  return rep;
}

JointReport joint_report(const std::vector<JointOutcome>& outcomes,
                         int total_gold_entities) {
  if (outcomes.empty()) throw DataError("joint_report: empty input");
  int matched = 0;
  int hallucinated = 0;
  int role_correct = 0;
  for (const JointOutcome& o : outcomes) {
    if (o.match.matched()) {
      ++matched;
      if (o.role_correct.value_or(false)) ++role_correct;
    } else if (o.match.kind == entmatch::MatchKind::Hallucination) {
      ++hallucinated;
    }
  }
  JointReport rep;
  rep.total_fills = static_cast<int>(outcomes.size());
  double total = static_cast<double>(rep.total_fills);
  rep.pct_correct_entity = round2(100.0 * matched / total);
  rep.pct_hallucination = round2(100.0 * hallucinated / total);
  rep.pct_correct_role = round2(100.0 * role_correct / total);
  rep.total_gold_entities = total_gold_entities;
  rep.gold_entity_recall =
      total_gold_entities > 0
          ? round2(100.0 * matched / static_cast<double>(total_gold_entities))
          : 0.0;
  return rep;
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  os << std::left << std::setw(30) << "Class" << std::right << std::setw(8)
     << "Prec." << std::setw(8) << "Rec." << std::setw(8) << "F1"
     << std::setw(9) << "Support" << "\n";
  for (const ClassReport& c : per_class) {
    os << std::left << std::setw(30) << c.label << std::right << std::setw(8)
       << fmt2(c.precision) << std::setw(8) << fmt2(c.recall) << std::setw(8)
       << fmt2(c.f1) << std::setw(9) << c.support << "\n";
  }
  os << std::left << std::setw(30) << "Accuracy" << std::right << std::setw(24)
     << fmt2(accuracy) << std::setw(9) << total << "\n";
  for (const ClassReport* avg : {&macro_avg, &weighted_avg}) {
    os << std::left << std::setw(30) << avg->label << std::right
       << std::setw(8) << fmt2(avg->precision) << std::setw(8)
       << fmt2(avg->recall) << std::setw(8) << fmt2(avg->f1) << std::setw(9)
       << avg->support << "\n";
  }
  if (abstained > 0) os << "Abstained (scored wrong): " << abstained << "\n";
  return os.str();
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os << "label,precision,recall,f1,support\n";
  for (const ClassReport& c : per_class) {
    os << c.label << "," << fmt2(c.precision) << "," << fmt2(c.recall) << ","
       << fmt2(c.f1) << "," << c.support << "\n";
  }
  for (const ClassReport* avg : {&macro_avg, &weighted_avg}) {
    os << avg->label << "," << fmt2(avg->precision) << "," << fmt2(avg->recall)
       << "," << fmt2(avg->f1) << "," << avg->support << "\n";
  }
  return os.str();
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["strategy"] = strategy;
  j["shots"] = shots;
  j["total"] = total;
  j["abstained"] = abstained;
  j["accuracy"] = round2(accuracy);
  auto cls = [](const ClassReport& c) {
    return nlohmann::json{{"label", c.label},
                          {"precision", round2(c.precision)},
                          {"recall", round2(c.recall)},
                          {"f1", round2(c.f1)},
                          {"support", c.support}};
  };
  j["per_class"] = nlohmann::json::array();
  for (const ClassReport& c : per_class) j["per_class"].push_back(cls(c));
  j["macro_avg"] = cls(macro_avg);
  j["weighted_avg"] = cls(weighted_avg);
  return j.dump();
}

std::string JointReport::to_table() const {
  std::ostringstream os;
  os << "Shots: " << shots << "\n"
     << "% Correct Entity Identification: " << fmt2(pct_correct_entity) << "\n"
     << "% Hallucination:                 " << fmt2(pct_hallucination) << "\n"
     << "% Correct Role Identification:   " << fmt2(pct_correct_role) << "\n"
     << "Total predicted fills (denominator): " << total_fills << "\n"
     << "Gold entities: " << total_gold_entities
     << "  (recall " << fmt2(gold_entity_recall) << ")\n";
  return os.str();
}

std::string JointReport::to_json() const {
  nlohmann::json j;
  j["shots"] = shots;
  j["pct_correct_entity"] = round2(pct_correct_entity);
  j["pct_hallucination"] = round2(pct_hallucination);
  j["pct_correct_role"] = round2(pct_correct_role);
  j["total_fills"] = total_fills;
  j["total_gold_entities"] = total_gold_entities;
  j["gold_entity_recall"] = round2(gold_entity_recall);
  return j.dump();
}

}  // namespace mframes::metrics

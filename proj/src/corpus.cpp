#include "privmark/corpus.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "privmark/tokenizer.hpp"

namespace privmark {

using nlohmann::json;

CorpusLoadResult parse_corpus(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("corpus is not valid JSON: ") + e.what());
  }
  const json* arr = &root;
  if (root.is_object() && root.contains("records")) arr = &root["records"];
  if (!arr->is_array()) throw FormatError("corpus must be a JSON array");

  CorpusLoadResult out;
  for (const auto& j : *arr) {
    CorpusRecord r;
    try {
      r.id = j.at("id").get<int>();
      r.word_count = j.at("word_count").get<int>();
      r.watermark_count = j.at("watermark_count").get<int>();
      r.watermark_words =
          j.at("watermark_words").get<std::vector<std::string>>();
      r.candidate_text = j.at("candidate_text").get<std::string>();
      r.removing_attack = j.value("removing_attack", "");
      r.paraphrase_attack = j.value("paraphrase_attack", "");
      r.domain = j.value("domain", "");
    } catch (const json::exception&) {
      out.skipped += 1;
      continue;
    }
    if (r.candidate_text.empty() || r.watermark_words.empty()) {
      out.skipped += 1;
      continue;
    }
    // Loose validation: the declared counts should match the tokenizer
    // within small slack; drift is reported, not fatal.
    int tokens = static_cast<int>(tokenize(r.candidate_text).size());
    if (std::abs(tokens - r.word_count) > 2)
      out.warnings.push_back("record " + std::to_string(r.id) +
                             ": word_count " + std::to_string(r.word_count) +
                             " vs tokenized " + std::to_string(tokens));
    if (r.watermark_count !=
        static_cast<int>(r.watermark_words.size()))
      out.warnings.push_back("record " + std::to_string(r.id) +
                             ": watermark_count differs from the list size");
    out.records.push_back(std::move(r));
  }
  return out;
}

CorpusLoadResult load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open corpus file " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_corpus(text);
}

std::vector<DetectTask> make_eval_tasks(
    const std::vector<CorpusRecord>& records, bool include_false_positive) {
  std::vector<DetectTask> tasks;
  for (const auto& r : records) {
    tasks.push_back({"original", r.id, r.candidate_text, r.watermark_words});
    if (!r.paraphrase_attack.empty())
      tasks.push_back(
          {"paraphrase", r.id, r.paraphrase_attack, r.watermark_words});
    if (!r.removing_attack.empty())
      tasks.push_back({"removal", r.id, r.removing_attack, r.watermark_words});
  }
  if (include_false_positive) {
    for (const auto& r : records)
      for (const auto& other : records)
        if (other.id != r.id && other.domain != r.domain)
          tasks.push_back({"unrelated-fp", r.id, other.candidate_text,
                           r.watermark_words});
  }
  return tasks;
}

EvalReport build_eval_report(const std::vector<DetectTask>& tasks,
                             const std::vector<bool>& decisions,
                             const std::string& mode,
                             const std::string& data_mode, int skipped,
                             std::vector<std::string> warnings) {
  if (tasks.size() != decisions.size())
    throw ShapeError("decision vector does not match the task list");
  EvalReport rep;
  rep.mode = mode;
  rep.data_mode = data_mode;
  rep.skipped = skipped;
  rep.warnings = std::move(warnings);
  for (size_t i = 0; i < tasks.size(); ++i) {
    ScenarioRate* rate = nullptr;
    if (tasks[i].scenario == "original")
      rate = &rep.original;
    else if (tasks[i].scenario == "paraphrase")
      rate = &rep.paraphrase;
    else if (tasks[i].scenario == "removal")
      rate = &rep.removal;
    else
      rate = &rep.false_positive;
    rate->total += 1;
    if (decisions[i]) rate->detected += 1;
    rep.decisions.push_back({tasks[i].scenario, tasks[i].record_id,
                             decisions[i]});
  }
  return rep;
}

std::string EvalReport::to_json() const {
  json j;
  j["mode"] = mode;
  j["data_mode"] = data_mode;
  auto rate = [](const ScenarioRate& r) {
    return json{{"detected", r.detected}, {"total", r.total},
                {"rate_percent", r.rate()}};
  };
  j["rates"] = {{"original", rate(original)},
                {"paraphrase", rate(paraphrase)},
                {"removal", rate(removal)},
                {"unrelated_fp", rate(false_positive)}};
  j["skipped"] = skipped;
  j["warnings"] = warnings;
  json dec = json::array();
  for (const auto& d : decisions)
    dec.push_back({{"scenario", d.scenario},
                   {"record_id", d.record_id},
                   {"detected", d.detected}});
  j["decisions"] = dec;
  return j.dump(2);
}

}  // namespace privmark

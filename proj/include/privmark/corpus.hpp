#pragma once

#include <string>
#include <vector>

#include "privmark/errors.hpp"

namespace privmark {

// One benchmark-corpus record: a watermarked text, its word list and the two
// attack rewrites. Field names follow the published record format so
// existing example files ingest unchanged.
struct CorpusRecord {
  int id = 0;
  int word_count = 0;
  int watermark_count = 0;
  std::vector<std::string> watermark_words;
  std::string candidate_text;
  std::string removing_attack;
  std::string paraphrase_attack;
  std::string domain;
};

struct CorpusLoadResult {
  std::vector<CorpusRecord> records;
  int skipped = 0;                     // structurally malformed, not usable
  std::vector<std::string> warnings;   // loose-validation notes
};

CorpusLoadResult load_corpus(const std::string& path);
CorpusLoadResult parse_corpus(const std::string& json_text);

// A single detection the evaluation wants to run.
struct DetectTask {
  std::string scenario;  // original | paraphrase | removal | unrelated-fp
  int record_id = 0;
  std::string text;
  std::vector<std::string> words;
};

// corpus mode: original/paraphrase/removal with the record's own word list,
// plus the false-positive pairing of each word list against every
// other-domain candidate text.
std::vector<DetectTask> make_eval_tasks(const std::vector<CorpusRecord>& records,
                                        bool include_false_positive);

struct ScenarioRate {
  int detected = 0;
  int total = 0;
  double rate() const { return total ? 100.0 * detected / total : 0.0; }
};

struct EvalReport {
  std::string mode;       // mpc | plaintext
  std::string data_mode;  // corpus | self
  ScenarioRate original, paraphrase, removal, false_positive;
  struct Decision {
    std::string scenario;
    int record_id = 0;
    bool detected = false;
  };
  std::vector<Decision> decisions;
  int skipped = 0;
  std::vector<std::string> warnings;

  std::string to_json() const;
};

EvalReport build_eval_report(const std::vector<DetectTask>& tasks,
                             const std::vector<bool>& decisions,
                             const std::string& mode,
                             const std::string& data_mode, int skipped,
                             std::vector<std::string> warnings);

}  // namespace privmark

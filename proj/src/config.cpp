#include "privmark/config.hpp"

#include <fstream>
#include <json.hpp>

#include "privmark/errors.hpp"
#include "privmark/prf.hpp"

namespace privmark {

using nlohmann::json;

u64 SessionConfig::effective_session_id() const {
  if (session_id != 0) return session_id;
  unsigned char tag[8] = {'s', 'e', 's', 's', 'i', 'o', 'n', '0'};
  return Prf64::siphash24(seed, 0x70726976u, tag, sizeof(tag));
}

SessionConfig parse_session_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  SessionConfig c;
  try {
    if (j.contains("party")) {
      std::string p = j["party"].get<std::string>();
      if (p == "P1" || p == "p1" || p == "1")
        c.party = PartyId::P1;
      else if (p == "P2" || p == "p2" || p == "2")
        c.party = PartyId::P2;
      else if (p == "P3" || p == "p3" || p == "3")
        c.party = PartyId::P3;
      else
        throw ConfigError("party must be P1, P2 or P3");
    }
    c.transport = j.value("transport", c.transport);
    if (c.transport != "memory" && c.transport != "tcp")
      throw ConfigError("transport must be memory or tcp");
    c.listen = j.value("listen", c.listen);
    if (j.contains("peers")) {
      auto& p = j["peers"];
      c.peers[0] = p.value("P1", "");
      c.peers[1] = p.value("P2", "");
      c.peers[2] = p.value("P3", "");
    }
    c.ell = j.value("ell", c.ell);
    c.frac_bits = j.value("frac_bits", c.frac_bits);
    c.seed = j.value("seed", c.seed);
    c.session_id = j.value("session_id", c.session_id);
    if (j.contains("profile")) {
      if (j["profile"].is_string()) {
        c.profile = NetworkProfile::by_name(j["profile"].get<std::string>());
      } else {
        c.profile.name = j["profile"].value("name", "custom");
        c.profile.bandwidth_bps = j["profile"].value("bandwidth_bps", 0.0);
        c.profile.latency_s = j["profile"].value("latency_s", 0.0);
      }
    }
    c.connect_timeout_ms = j.value("connect_timeout_ms", c.connect_timeout_ms);
    c.io_timeout_ms = j.value("io_timeout_ms", c.io_timeout_ms);
    c.vocab_path = j.value("vocab_path", c.vocab_path);
    c.doc_embeddings_path = j.value("doc_embeddings_path", c.doc_embeddings_path);
    c.token_embeddings_path =
        j.value("token_embeddings_path", c.token_embeddings_path);
    c.table_dir = j.value("table_dir", c.table_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config field: ") + e.what());
  }
  // Validate ring parameters early; Ring throws RangeError on nonsense.
  try {
    c.ring();
  } catch (const RangeError& e) {
    throw ConfigError(std::string("bad ring parameters: ") + e.what());
  }
  return c;
}

SessionConfig load_session_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_session_config(text);
}

}  // namespace privmark

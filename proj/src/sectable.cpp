#include "privmark/sectable.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace privmark {

namespace fs = std::filesystem;
using nlohmann::json;

Vocabulary vocabulary_from_words(std::vector<std::string> words) {
  Vocabulary v;
  v.words = std::move(words);
  for (size_t i = 0; i < v.words.size(); ++i) {
    auto& w = v.words[i];
    std::transform(w.begin(), w.end(), w.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (w.empty()) throw FormatError("empty vocabulary entry");
    if (!v.word2idx.emplace(w, static_cast<int>(i)).second)
      throw DuplicateWordError("duplicate vocabulary word: " + w);
  }
  return v;
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open vocabulary file " + path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    size_t start = line.find_first_not_of(' ');
    if (start == std::string::npos) continue;
    words.push_back(line.substr(start));
  }
  if (words.empty()) throw FormatError("vocabulary file is empty: " + path);
  return vocabulary_from_words(std::move(words));
}

EmbeddingSet embeddings_from_rows(RealMat rows) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double norm = rows.row(i).norm();
    if (norm < 1e-12)
      throw ZeroRowError("embedding row " + std::to_string(i) +
                         " has zero norm");
    rows.row(i) /= norm;
  }
  EmbeddingSet e;
  e.rows = std::move(rows);
  return e;
}

EmbeddingSet load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open embedding file " + path);
  Eigen::Index n = 0, d = 0;
  if (!(in >> n >> d) || n <= 0 || d <= 0)
    throw FormatError("embedding file header must be 'N d': " + path);
  RealMat rows(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      if (!(in >> rows(i, j)))
        throw FormatError("embedding file truncated at row " +
                          std::to_string(i));
  return embeddings_from_rows(std::move(rows));
}

static constexpr char kBinaryMagic[8] = {'P', 'M', 'E', 'M', 'B', 'E', 'D', '1'};

EmbeddingSet load_embeddings_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open embedding file " + path);
  char magic[8];
  std::uint32_t n = 0, d = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&d), 4);
  if (!in || std::memcmp(magic, kBinaryMagic, 8) != 0)
    throw FormatError("bad binary embedding header in " + path);
  RealMat rows(n, d);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < d; ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), 8);
      if (!in) throw FormatError("binary embedding file truncated: " + path);
      rows(i, j) = v;
    }
  return embeddings_from_rows(std::move(rows));
}

void save_embeddings_binary(const std::string& path, const RealMat& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write embedding file " + path);
  std::uint32_t n = static_cast<std::uint32_t>(rows.rows());
  std::uint32_t d = static_cast<std::uint32_t>(rows.cols());
  out.write(kBinaryMagic, 8);
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&d), 4);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < d; ++j) {
      double v = rows(i, j);
      out.write(reinterpret_cast<const char*>(&v), 8);
    }
}

std::pair<u64, u64> sectable_seed_contribution(u64 session_seed, PartyId p) {
  unsigned char tag[8] = {'c', 't', 'b', 's', 'e', 'e', 'd',
                          static_cast<unsigned char>(index_of(p))};
  u64 lo = Prf64::siphash24(session_seed, 0x1001, tag, sizeof(tag));
  u64 hi = Prf64::siphash24(session_seed, 0x1002, tag, sizeof(tag));
  return {lo, hi};
}

std::vector<int> seeded_permutation(u64 seed_lo, u64 seed_hi, int n) {
  Prf64 prf(PrfKey{seed_lo, seed_hi});
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  u64 ctr = 0;
  // Fisher-Yates with rejection sampling for unbiased draws.
  for (int i = n - 1; i > 0; --i) {
    u64 bound = static_cast<u64>(i) + 1;
    u64 limit = ~u64{0} - (~u64{0} % bound);
    u64 r;
    do {
      r = prf.eval(0x7065726d, ctr++, static_cast<u64>(i));
    } while (r >= limit);
    std::swap(perm[i], perm[static_cast<int>(r % bound)]);
  }
  return perm;
}

SecTable build_sectable(PartyContext& ctx, const Vocabulary& vocab,
                        const EmbeddingSet& embeddings) {
  const Ring& ring = ctx.ring();
  PartyId me = ctx.me();
  PhaseScope scope(ctx, "Sectable");

  // Public dimensions: M from P1, (N, d) from P2.
  RingVec dims_m(1);
  dims_m[0] = (me == PartyId::P1) ? static_cast<u64>(vocab.size()) : 0;
  if (me == PartyId::P1) {
    ctx.send_elems(PartyId::P2, dims_m, /*public_metadata=*/true);
    ctx.send_elems(PartyId::P3, dims_m, /*public_metadata=*/true);
  } else {
    dims_m = ctx.recv_elems(PartyId::P1);
  }
  RingVec dims_nd(2);
  if (me == PartyId::P2) {
    dims_nd[0] = static_cast<u64>(embeddings.count());
    dims_nd[1] = static_cast<u64>(embeddings.dim());
    ctx.send_elems(PartyId::P1, dims_nd, /*public_metadata=*/true);
    ctx.send_elems(PartyId::P3, dims_nd, /*public_metadata=*/true);
  } else {
    dims_nd = ctx.recv_elems(PartyId::P2);
  }
  int M = static_cast<int>(dims_m[0]);
  int N = static_cast<int>(dims_nd[0]);
  int d = static_cast<int>(dims_nd[1]);
  if (M <= 0) throw FormatError("empty vocabulary");
  if (M > N)
    throw SizeError("vocabulary larger than the embedding pool (M > N)");

  // Joint seed: every party contributes 128 bits; XOR of the three.
  // Contributions are a pure function of (session seed, party) so a
  // plaintext baseline with the same seed reproduces the permutation.
  auto [lo, hi] = sectable_seed_contribution(ctx.session_seed(), me);
  auto pack = [](u64 v0, u64 v1) {
    std::vector<std::uint8_t> b(16);
    for (int i = 0; i < 8; ++i) {
      b[i] = static_cast<std::uint8_t>((v0 >> (8 * i)) & 0xff);
      b[8 + i] = static_cast<std::uint8_t>((v1 >> (8 * i)) & 0xff);
    }
    return b;
  };
  auto unpack = [](const std::vector<std::uint8_t>& b) {
    u64 v0 = 0, v1 = 0;
    for (int i = 0; i < 8; ++i) {
      v0 |= static_cast<u64>(b[i]) << (8 * i);
      v1 |= static_cast<u64>(b[8 + i]) << (8 * i);
    }
    return std::pair<u64, u64>(v0, v1);
  };
  auto mine = pack(lo, hi);
  ctx.send_raw(next(me), mine);
  ctx.send_raw(prev(me), mine);
  auto [a0, a1] = unpack(ctx.recv_raw(next(me)));
  auto [b0, b1] = unpack(ctx.recv_raw(prev(me)));
  u64 seed_lo = lo ^ a0 ^ b0;
  u64 seed_hi = hi ^ a1 ^ b1;

  std::vector<int> perm = seeded_permutation(seed_lo, seed_hi, N);

  RingMat plain;
  if (me == PartyId::P2) {
    plain.resize(M, d);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < d; ++j)
        plain(i, j) = ring.encode(embeddings.rows(perm[i], j));
  }
  SecTable out;
  out.table = deal_matrix(ctx, PartyId::P2, M, d, plain, ring.frac_bits());
  out.M = M;
  out.d = d;
  out.frac_bits = ring.frac_bits();
  if (me == PartyId::P1) out.vocab = vocab;
  return out;
}

void save_sectable(const SecTable& table, PartyId me, u64 session_id,
                   const std::string& dir) {
  fs::create_directories(dir);
  Ring ring(64, table.frac_bits);  // element packing is ell=64 here
  std::string path =
      (fs::path(dir) / (std::string("table.") + party_name(me) + ".share"))
          .string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write share file " + path);

  Frame meta;
  meta.session = session_id;
  meta.phase = 0x5442;  // "TB"
  meta.sequence = 1;
  RingVec header(4);
  header[0] = static_cast<u64>(table.M);
  header[1] = static_cast<u64>(table.d);
  header[2] = static_cast<u64>(table.frac_bits);
  header[3] = static_cast<u64>(index_of(me));
  meta.payload = elems_to_bytes(ring, header);
  auto mb = encode_frame(meta);
  out.write(reinterpret_cast<const char*>(mb.data()),
            static_cast<std::streamsize>(mb.size()));

  RingVec flat(2 * table.M * table.d);
  Eigen::Index off = 0;
  for (int i = 0; i < table.M; ++i)
    for (int j = 0; j < table.d; ++j) flat[off++] = table.table.first(i, j);
  for (int i = 0; i < table.M; ++i)
    for (int j = 0; j < table.d; ++j) flat[off++] = table.table.second(i, j);
  Frame data;
  data.session = session_id;
  data.phase = 0x5442;
  data.sequence = 2;
  data.payload = elems_to_bytes(ring, flat);
  auto db = encode_frame(data);
  out.write(reinterpret_cast<const char*>(db.data()),
            static_cast<std::streamsize>(db.size()));

  if (me == PartyId::P1) {
    json j;
    j["M"] = table.M;
    j["d"] = table.d;
    j["frac_bits"] = table.frac_bits;
    j["words"] = table.vocab.words;
    std::ofstream idx((fs::path(dir) / "index_map.json").string());
    idx << j.dump(2) << "\n";
  }
}

namespace {

Frame read_frame_from(std::istream& in) {
  std::vector<std::uint8_t> head(Frame::kHeaderBytes);
  in.read(reinterpret_cast<char*>(head.data()),
          static_cast<std::streamsize>(head.size()));
  if (!in) throw FormatError("share file truncated (frame header)");
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i)
    len |= static_cast<std::uint32_t>(head[18 + i]) << (8 * i);
  std::vector<std::uint8_t> all(head);
  all.resize(Frame::kHeaderBytes + len);
  in.read(reinterpret_cast<char*>(all.data() + Frame::kHeaderBytes), len);
  if (!in) throw FormatError("share file truncated (frame payload)");
  return decode_frame(all);
}

}  // namespace

SecTable load_sectable(const Ring& ring, PartyId me, const std::string& dir) {
  std::string path =
      (fs::path(dir) / (std::string("table.") + party_name(me) + ".share"))
          .string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open share file " + path);
  Ring pack(64, ring.frac_bits());
  Frame meta = read_frame_from(in);
  RingVec header = bytes_to_elems(pack, meta.payload);
  if (header.size() != 4) throw FormatError("bad share file header");
  SecTable out;
  out.M = static_cast<int>(header[0]);
  out.d = static_cast<int>(header[1]);
  out.frac_bits = static_cast<int>(header[2]);
  if (static_cast<int>(header[3]) != index_of(me))
    throw FormatError("share file belongs to a different party");
  if (out.frac_bits != ring.frac_bits())
    throw FormatError("share file scale differs from the session scale");
  Frame data = read_frame_from(in);
  RingVec flat = bytes_to_elems(pack, data.payload);
  if (flat.size() != 2 * out.M * out.d)
    throw FormatError("share file payload has the wrong size");
  out.table.owner = me;
  out.table.frac_bits = out.frac_bits;
  out.table.first.resize(out.M, out.d);
  out.table.second.resize(out.M, out.d);
  Eigen::Index off = 0;
  for (int i = 0; i < out.M; ++i)
    for (int j = 0; j < out.d; ++j) out.table.first(i, j) = flat[off++];
  for (int i = 0; i < out.M; ++i)
    for (int j = 0; j < out.d; ++j) out.table.second(i, j) = flat[off++];

  if (me == PartyId::P1) {
    std::ifstream idx((fs::path(dir) / "index_map.json").string());
    if (!idx) throw FormatError("missing index_map.json in " + dir);
    json j;
    try {
      idx >> j;
      out.vocab =
          vocabulary_from_words(j.at("words").get<std::vector<std::string>>());
    } catch (const json::exception& e) {
      throw FormatError(std::string("bad index map: ") + e.what());
    }
  }
  return out;
}

}  // namespace privmark

#include "graphclus/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace graphclus {

namespace {

constexpr char kEmbeddingMagic[4] = {'E', 'M', 'B', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) throw std::runtime_error(std::string("embeddings: truncated ") + what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::string line_error(const char* kind, std::size_t line, const std::string& msg) {
  return std::string(kind) + ": line " + std::to_string(line) + ": " + msg;
}

// Parses a nonnegative decimal integer occupying all of `token`.
std::optional<std::uint64_t> parse_uint(std::string_view token) {
  if (token.empty()) return std::nullopt;
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  fn(out);
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

std::ifstream open_input(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

}  // namespace

void write_embeddings(std::ostream& out, const EmbeddingSet& emb) {
  out.write(kEmbeddingMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(emb.size()));
  put_u32(out, static_cast<std::uint32_t>(emb.dim()));
  for (double x : emb.features().data()) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(x));
    put_u32(out, bits);
  }
}

EmbeddingSet read_embeddings(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kEmbeddingMagic, 4) != 0) {
    throw std::runtime_error("embeddings: bad magic (expected EMB1)");
  }
  const std::uint32_t n = get_u32(in, "header");
  const std::uint32_t d = get_u32(in, "header");
  std::vector<double> data(static_cast<std::size_t>(n) * d);
  std::vector<unsigned char> raw(data.size() * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw std::runtime_error("embeddings: truncated payload, expected " + std::to_string(n) + "x" +
                             std::to_string(d) + " floats");
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(raw[4 * i + b]) << (8 * b);
    data[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return EmbeddingSet(Matrix(n, d, std::move(data)));
}

void write_labels(std::ostream& out, const LabelSet& labels) {
  for (ClassId c : labels.values()) out << c << '\n';
}

LabelSet read_labels(std::istream& in) {
  std::vector<ClassId> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto token = trim(line);
    if (token.empty()) continue;
    const auto value = parse_uint(token);
    if (!value || *value > UINT32_MAX) {
      throw std::runtime_error(line_error("labels", lineno, "expected a nonnegative integer"));
    }
    labels.push_back(static_cast<ClassId>(*value));
  }
  return LabelSet(std::move(labels));
}

void write_proposals(std::ostream& out, const ProposalSet& proposals) {
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    out << "iter:" << proposals.iterations()[i];
    for (VertexId v : proposals[i]) out << ' ' << v;
    out << '\n';
  }
}

ProposalSet read_proposals(std::istream& in, std::optional<std::size_t> n) {
  ProposalSet out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tokens = split_ws(trim(line));
    if (tokens.empty()) continue;
    if (tokens[0].substr(0, 5) != "iter:") {
      throw std::runtime_error(line_error("proposals", lineno, "missing iter:<i> prefix"));
    }
    const auto iter = parse_uint(tokens[0].substr(5));
    if (!iter) throw std::runtime_error(line_error("proposals", lineno, "bad iteration index"));
    if (tokens.size() < 2) throw std::runtime_error(line_error("proposals", lineno, "empty proposal"));
    std::vector<VertexId> ids;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto id = parse_uint(tokens[t]);
      if (!id || *id > UINT32_MAX) {
        throw std::runtime_error(line_error("proposals", lineno, "bad vertex id"));
      }
      if (n && *id >= *n) {
        throw std::runtime_error(line_error("proposals", lineno,
                                            "vertex id " + std::to_string(*id) +
                                                " out of range for n=" + std::to_string(*n)));
      }
      ids.push_back(static_cast<VertexId>(*id));
    }
    out.add(VertexSet(std::move(ids)), static_cast<std::size_t>(*iter));
  }
  return out;
}

void write_clusters(std::ostream& out, const ClusterSet& clusters) {
  for (std::size_t v = 0; v < clusters.size(); ++v) out << v << '\t' << clusters[v] << '\n';
}

ClusterSet read_clusters(std::istream& in) {
  std::vector<std::pair<std::uint64_t, std::uint32_t>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tokens = split_ws(trim(line));
    if (tokens.empty()) continue;
    if (tokens.size() != 2) {
      throw std::runtime_error(line_error("clusters", lineno, "expected <vertex>\\t<cluster>"));
    }
    const auto v = parse_uint(tokens[0]);
    const auto c = parse_uint(tokens[1]);
    if (!v || !c || *c > UINT32_MAX) {
      throw std::runtime_error(line_error("clusters", lineno, "bad integer"));
    }
    rows.emplace_back(*v, static_cast<std::uint32_t>(*c));
  }
  const std::size_t n = rows.size();
  constexpr auto kMissing = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> assignment(n, kMissing);
  std::vector<char> present(n, 0);
  for (const auto& [v, c] : rows) {
    if (v >= n) {
      throw std::runtime_error("clusters: vertex id " + std::to_string(v) +
                               " out of range for " + std::to_string(n) + " lines");
    }
    if (present[v]) throw std::runtime_error("clusters: vertex " + std::to_string(v) + " repeated");
    present[v] = 1;
    assignment[v] = c;
  }
  return ClusterSet(assignment);
}

void save_embeddings(const std::string& path, const EmbeddingSet& emb) {
  with_output(path, [&](std::ostream& out) { write_embeddings(out, emb); }, true);
}

EmbeddingSet load_embeddings(const std::string& path) {
  auto in = open_input(path, true);
  return read_embeddings(in);
}

void save_labels(const std::string& path, const LabelSet& labels) {
  with_output(path, [&](std::ostream& out) { write_labels(out, labels); });
}

LabelSet load_labels(const std::string& path) {
  auto in = open_input(path);
  return read_labels(in);
}

void save_proposals(const std::string& path, const ProposalSet& proposals) {
  with_output(path, [&](std::ostream& out) { write_proposals(out, proposals); });
}

ProposalSet load_proposals(const std::string& path, std::optional<std::size_t> n) {
  auto in = open_input(path);
  return read_proposals(in, n);
}

void save_clusters(const std::string& path, const ClusterSet& clusters) {
  with_output(path, [&](std::ostream& out) { write_clusters(out, clusters); });
}

ClusterSet load_clusters(const std::string& path) {
  auto in = open_input(path);
  return read_clusters(in);
}

}  // namespace graphclus

#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "graphclus/eval.hpp"
#include "graphclus/graph.hpp"
#include "graphclus/proposals.hpp"

namespace graphclus {

// Embeddings: "EMB1", u32 LE n, u32 LE d, then n*d float32 LE row-major.
// Values are narrowed to float32 on write and renormalized on read.
void write_embeddings(std::ostream& out, const EmbeddingSet& emb);
EmbeddingSet read_embeddings(std::istream& in);

// Labels: one nonnegative integer per line, line i is vertex i.
void write_labels(std::ostream& out, const LabelSet& labels);
LabelSet read_labels(std::istream& in);

// Proposals: one line per proposal, "iter:<i> <id> <id> ...".
// When n is given, ids >= n are rejected.
void write_proposals(std::ostream& out, const ProposalSet& proposals);
ProposalSet read_proposals(std::istream& in, std::optional<std::size_t> n = std::nullopt);

// Clusters: one line per vertex, "<vertex_id>\t<cluster_id>". Every vertex in
// [0, n) must appear exactly once.
void write_clusters(std::ostream& out, const ClusterSet& clusters);
ClusterSet read_clusters(std::istream& in);

void save_embeddings(const std::string& path, const EmbeddingSet& emb);
EmbeddingSet load_embeddings(const std::string& path);
void save_labels(const std::string& path, const LabelSet& labels);
LabelSet load_labels(const std::string& path);
void save_proposals(const std::string& path, const ProposalSet& proposals);
ProposalSet load_proposals(const std::string& path, std::optional<std::size_t> n = std::nullopt);
void save_clusters(const std::string& path, const ClusterSet& clusters);
ClusterSet load_clusters(const std::string& path);

}  // namespace graphclus

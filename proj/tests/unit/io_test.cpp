#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "graphclus/checkpoint.hpp"
#include "graphclus/io.hpp"
#include "support/oracles.hpp"

using namespace graphclus;

namespace {

template <typename Model>
std::vector<Matrix> params_of(const Model& m) {
  std::vector<Matrix> out;
  for (const Matrix* p : parameters(m)) out.push_back(*p);
  return out;
}

}  // namespace

TEST_CASE("embeddings round trip up to float narrowing") {
  Rng rng(1);
  auto emb = oracle::random_embeddings(rng, 17, 5);
  std::stringstream buf;
  write_embeddings(buf, emb);
  CHECK(buf.str().size() == 4 + 8 + 17 * 5 * 4);
  CHECK(buf.str().substr(0, 4) == "EMB1");
  auto back = read_embeddings(buf);
  REQUIRE(back.size() == 17);
  REQUIRE(back.dim() == 5);
  CHECK(max_abs_diff(back.features(), emb.features()) < 1e-6);
}

TEST_CASE("embedding reader errors") {
  std::stringstream bad_magic("EMB2\x01\0\0\0\x01\0\0\0");
  CHECK_THROWS_AS(read_embeddings(bad_magic), std::runtime_error);
  std::stringstream truncated(std::string("EMB1\x02\0\0\0\x02\0\0\0\0\0", 14));
  CHECK_THROWS_AS(read_embeddings(truncated), std::runtime_error);
}

TEST_CASE("labels round trip and reject junk") {
  LabelSet labels({3, 0, 7, 7});
  std::stringstream buf;
  write_labels(buf, labels);
  CHECK(buf.str() == "3\n0\n7\n7\n");
  CHECK(read_labels(buf) == labels);
  std::stringstream junk("1\nx\n");
  CHECK_THROWS_AS(read_labels(junk), std::runtime_error);
  std::stringstream negative("1\n-2\n");
  CHECK_THROWS_AS(read_labels(negative), std::runtime_error);
}

TEST_CASE("proposals round trip") {
  ProposalSet ps;
  ps.add(VertexSet{4, 1, 2}, 0);
  ps.add(VertexSet{9}, 2);
  std::stringstream buf;
  write_proposals(buf, ps);
  CHECK(buf.str() == "iter:0 1 2 4\niter:2 9\n");
  auto back = read_proposals(buf);
  CHECK(back.proposals() == ps.proposals());
  CHECK(back.iterations() == ps.iterations());

  std::stringstream out_of_range("iter:0 1 12\n");
  CHECK_THROWS_AS(read_proposals(out_of_range, 10), std::runtime_error);
  std::stringstream no_prefix("0 1 2\n");
  CHECK_THROWS_AS(read_proposals(no_prefix), std::runtime_error);
}

TEST_CASE("clusters round trip and demand full coverage") {
  std::vector<std::uint32_t> raw{0, 1, 0, 2};
  ClusterSet c(raw);
  std::stringstream buf;
  write_clusters(buf, c);
  CHECK(buf.str() == "0\t0\n1\t1\n2\t0\n3\t2\n");
  CHECK(read_clusters(buf) == c);
  std::stringstream gap("0\t0\n2\t1\n");
  CHECK_THROWS_AS(read_clusters(gap), std::runtime_error);
  std::stringstream twice("0\t0\n0\t1\n");
  CHECK_THROWS_AS(read_clusters(twice), std::runtime_error);
}

TEST_CASE("file helpers report missing paths") {
  CHECK_THROWS_AS(load_embeddings("/nonexistent/dir/x.emb"), std::runtime_error);
  CHECK_THROWS_AS(load_labels("/nonexistent/dir/x.txt"), std::runtime_error);
}

TEST_CASE("checkpoints round trip bit exactly") {
  Rng rng(3);
  auto det = GcnDetModel::init({6, 10, 4}, rng);
  det.head_iop.bias(0, 0) = 0.123456789012345;
  std::stringstream buf;
  write_checkpoint(buf, det);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 4) == "GCNM");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 'D');
  const std::size_t params = 6 * 10 + 10 * 4 + 2 * (4 + 1);
  CHECK(bytes.size() == 6 + 12 + params * 8);
  auto back = read_det_checkpoint(buf);
  CHECK(params_of(back) == params_of(det));
  CHECK(back.pooling == Pooling::max);

  auto seg = GcnSegModel::init({6, 10, 4}, rng);
  std::stringstream sbuf;
  write_checkpoint(sbuf, seg);
  auto any = read_checkpoint(sbuf);
  REQUIRE(std::holds_alternative<GcnSegModel>(any));
  CHECK(params_of(std::get<GcnSegModel>(any)) == params_of(seg));
  CHECK(std::get<GcnSegModel>(any).dims() == GcnDims{6, 10, 4});

  auto path = std::filesystem::temp_directory_path() / "graphclus_ckpt_test.bin";
  save_checkpoint(path.string(), det);
  CHECK(params_of(load_det_checkpoint(path.string())) == params_of(det));
  CHECK_THROWS_AS(load_seg_checkpoint(path.string()), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint reader errors") {
  Rng rng(4);
  auto det = GcnDetModel::init({2, 3, 2}, rng);
  std::stringstream buf;
  write_checkpoint(buf, det);
  const std::string good = buf.str();

  std::string magic = good;
  magic[0] = 'X';
  std::stringstream m(magic);
  CHECK_THROWS_AS(read_checkpoint(m), std::runtime_error);

  std::string version = good;
  version[4] = 9;
  std::stringstream v(version);
  CHECK_THROWS_AS(read_checkpoint(v), std::runtime_error);

  std::string kind = good;
  kind[5] = 'Q';
  std::stringstream k(kind);
  CHECK_THROWS_AS(read_checkpoint(k), std::runtime_error);

  std::stringstream t(good.substr(0, good.size() - 3));
  CHECK_THROWS_AS(read_checkpoint(t), std::runtime_error);

  det.pooling = Pooling::mean;
  std::stringstream out;
  CHECK_THROWS_AS(write_checkpoint(out, det), std::invalid_argument);
}

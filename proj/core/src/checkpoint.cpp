#include "graphclus/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace graphclus {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void get_bytes(std::istream& in, unsigned char* dst, std::size_t n) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw std::runtime_error("checkpoint: truncated stream");
  }
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  get_bytes(in, b, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  get_bytes(in, b, 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

void write_header(std::ostream& out, char kind, const GcnDims& dims) {
  out.write(kCheckpointMagic, 4);
  out.put(static_cast<char>(kCheckpointVersion));
  out.put(kind);
  put_u32(out, static_cast<std::uint32_t>(dims.input));
  put_u32(out, static_cast<std::uint32_t>(dims.hidden1));
  put_u32(out, static_cast<std::uint32_t>(dims.hidden2));
}

template <typename Params>
void write_params(std::ostream& out, const Params& params) {
  for (const Matrix* m : params)
    for (double x : m->data()) put_f64(out, x);
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

template <typename Params>
void read_params(std::istream& in, const Params& params) {
  for (Matrix* m : params)
    for (double& x : m->data()) x = get_f64(in);
}

}  // namespace

void write_checkpoint(std::ostream& out, const GcnDetModel& model) {
  if (model.pooling != Pooling::max) {
    throw std::invalid_argument("write_checkpoint: only max-pooling detectors are serializable");
  }
  write_header(out, 'D', model.dims());
  write_params(out, parameters(model));
}

void write_checkpoint(std::ostream& out, const GcnSegModel& model) {
  write_header(out, 'S', model.dims());
  write_params(out, parameters(model));
}

AnyModel read_checkpoint(std::istream& in) {
  unsigned char header[6];
  get_bytes(in, header, 6);
  if (std::memcmp(header, kCheckpointMagic, 4) != 0) {
    throw std::runtime_error("checkpoint: bad magic (expected GCNM)");
  }
  if (header[4] != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(header[4]));
  }
  GcnDims dims;
  dims.input = get_u32(in);
  dims.hidden1 = get_u32(in);
  dims.hidden2 = get_u32(in);
  Rng unused(0);
  switch (header[5]) {
    case 'D': {
      GcnDetModel m = GcnDetModel::zeros_like(GcnDetModel::init(dims, unused));
      read_params(in, parameters(m));
      return m;
    }
    case 'S': {
      GcnSegModel m = GcnSegModel::zeros_like(GcnSegModel::init(dims, unused));
      read_params(in, parameters(m));
      return m;
    }
    default:
      throw std::runtime_error(std::string("checkpoint: unknown model kind '") +
                               static_cast<char>(header[5]) + "'");
  }
}

GcnDetModel read_det_checkpoint(std::istream& in) {
  AnyModel m = read_checkpoint(in);
  if (auto* det = std::get_if<GcnDetModel>(&m)) return std::move(*det);
  throw std::runtime_error("checkpoint: expected a detector (kind D), found a segmenter");
}

GcnSegModel read_seg_checkpoint(std::istream& in) {
  AnyModel m = read_checkpoint(in);
  if (auto* seg = std::get_if<GcnSegModel>(&m)) return std::move(*seg);
  throw std::runtime_error("checkpoint: expected a segmenter (kind S), found a detector");
}

namespace {

template <typename Model>
void save_impl(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_checkpoint(out, model);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

}  // namespace

void save_checkpoint(const std::string& path, const GcnDetModel& model) { save_impl(path, model); }
void save_checkpoint(const std::string& path, const GcnSegModel& model) { save_impl(path, model); }

GcnDetModel load_det_checkpoint(const std::string& path) {
  auto in = open_in(path);
  return read_det_checkpoint(in);
}

GcnSegModel load_seg_checkpoint(const std::string& path) {
  auto in = open_in(path);
  return read_seg_checkpoint(in);
}

}  // namespace graphclus

#include "lograb/patch.hpp"

#include <cstring>
#include <stdexcept>

namespace lograb {

namespace {

void put_u32(std::string& out, uint32_t v) {
  char b[4];
  b[0] = static_cast<char>(v & 0xFF);
  b[1] = static_cast<char>((v >> 8) & 0xFF);
  b[2] = static_cast<char>((v >> 16) & 0xFF);
  b[3] = static_cast<char>((v >> 24) & 0xFF);
  out.append(b, 4);
}

void put_f64(std::string& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  out.append(b, 8);
}

struct Reader {
  const std::string& buf;
  size_t pos = 0;
  uint32_t u32() {
    if (pos + 4 > buf.size()) throw std::invalid_argument("decode_patch: truncated payload");
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(buf[pos + i]);
    pos += 4;
    return v;
  }
  double f64() {
    if (pos + 8 > buf.size()) throw std::invalid_argument("decode_patch: truncated payload");
    uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(buf[pos + i]);
    pos += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
};

}  // namespace

std::string encode_patch(const PatchObservation& obs) {
  const int q = obs.q();
  const int k = obs.k();
  if (obs.embedding.rows() != q || obs.retained.size() != k)
    throw std::invalid_argument("encode_patch: inconsistent patch dimensions");
  std::string out;
  out.reserve(16 + 4u * q + 8u * k + 8u * q * k);
  put_u32(out, static_cast<uint32_t>(q));
  put_u32(out, static_cast<uint32_t>(k));
  put_f64(out, obs.lambda_kp1);
  for (uint32_t id : obs.nodes) put_u32(out, id);
  for (int i = 0; i < k; ++i) put_f64(out, obs.retained(i));
  for (int r = 0; r < q; ++r)
    for (int c = 0; c < k; ++c) put_f64(out, obs.embedding(r, c));
  return out;
}

PatchObservation decode_patch(const std::string& bytes) {
  Reader rd{bytes};
  PatchObservation obs;
  uint32_t q = rd.u32();
  uint32_t k = rd.u32();
  if (q == 0) throw std::invalid_argument("decode_patch: empty patch");
  if (k == 0 || k > q) throw std::invalid_argument("decode_patch: invalid k");
  obs.lambda_kp1 = rd.f64();
  obs.nodes.resize(q);
  for (uint32_t i = 0; i < q; ++i) obs.nodes[i] = rd.u32();
  for (uint32_t i = 1; i < q; ++i)
    if (obs.nodes[i] <= obs.nodes[i - 1])
      throw std::invalid_argument("decode_patch: node ids not strictly ascending");
  obs.retained.resize(k);
  for (uint32_t i = 0; i < k; ++i) obs.retained(i) = rd.f64();
  obs.embedding.resize(q, k);
  for (uint32_t r = 0; r < q; ++r)
    for (uint32_t c = 0; c < k; ++c) obs.embedding(r, c) = rd.f64();
  if (rd.pos != bytes.size())
    throw std::invalid_argument("decode_patch: trailing bytes in payload");
  return obs;
}

}  // namespace lograb

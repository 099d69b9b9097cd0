#include "binquant/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "binquant/common.hpp"

namespace binquant {

namespace {

constexpr char kMagic[4] = {'B', 'Q', 'N', 'T'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

void put_f32(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

struct Cursor {
  const std::string& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size())
      throw IoError(IoCode::Truncated, "checkpoint: truncated (need " +
                                           std::to_string(n) + " bytes at offset " +
                                           std::to_string(pos) + ")");
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = std::uint16_t(std::uint8_t(buf[pos])) |
                      std::uint16_t(std::uint8_t(buf[pos + 1])) << 8;
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(buf[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() {
    std::uint64_t bits = u64();
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
  }
  float f32() {
    std::uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

}  // namespace

void Checkpoint::add_f64(const std::string& name, std::vector<std::size_t> dims,
                         std::span<const double> data) {
  CheckpointEntry e;
  e.name = name;
  e.dtype = 2;
  e.dims = std::move(dims);
  if (e.count() != data.size())
    throw std::invalid_argument("checkpoint: dims do not match data size for " + name);
  e.f64.assign(data.begin(), data.end());
  entries.push_back(std::move(e));
}

void Checkpoint::add_bytes(const std::string& name, const std::string& bytes) {
  CheckpointEntry e;
  e.name = name;
  e.dtype = 0;
  e.dims = {bytes.size()};
  e.u8.assign(bytes.begin(), bytes.end());
  entries.push_back(std::move(e));
}

const CheckpointEntry* Checkpoint::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

const CheckpointEntry& Checkpoint::at(const std::string& name) const {
  const CheckpointEntry* e = find(name);
  if (!e) throw IoError(IoCode::DimMismatch, "checkpoint: missing tensor '" + name + "'");
  return *e;
}

std::string Checkpoint::bytes_of(const std::string& name) const {
  const CheckpointEntry& e = at(name);
  return std::string(e.u8.begin(), e.u8.end());
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::string out;
  out.append(kMagic, 4);
  put_u16(out, kVersion);
  if (ck.entries.size() > 0xffffffffULL)
    throw std::invalid_argument("checkpoint: too many entries");
  put_u32(out, std::uint32_t(ck.entries.size()));
  for (const auto& e : ck.entries) {
    if (e.name.size() > 0xffff)
      throw std::invalid_argument("checkpoint: name too long: " + e.name);
    std::size_t want = 1;
    for (std::size_t d : e.dims) want *= d;
    std::size_t have = e.dtype == 0 ? e.u8.size() : e.f64.size();
    if (have != want)
      throw std::invalid_argument("checkpoint: entry '" + e.name + "' has " +
                                  std::to_string(have) + " values but dims imply " +
                                  std::to_string(want));
    put_u16(out, std::uint16_t(e.name.size()));
    out.append(e.name);
    out.push_back(char(e.dtype));
    if (e.dims.size() > 0xff) throw std::invalid_argument("checkpoint: rank too large");
    out.push_back(char(e.dims.size()));
    for (std::size_t d : e.dims) put_u64(out, d);
    switch (e.dtype) {
      case 0:
        out.append(reinterpret_cast<const char*>(e.u8.data()), e.u8.size());
        break;
      case 1:
        for (double d : e.f64) put_f32(out, float(d));
        break;
      case 2:
        for (double d : e.f64) put_f64(out, d);
        break;
      default:
        throw std::invalid_argument("checkpoint: unknown dtype tag");
    }
  }

  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(IoCode::OpenFailed, "checkpoint: cannot open " + tmp);
    f.write(out.data(), std::streamsize(out.size()));
    f.flush();
    if (!f) throw IoError(IoCode::OpenFailed, "checkpoint: write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError(IoCode::OpenFailed, "checkpoint: rename failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(IoCode::OpenFailed, "checkpoint: cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  Cursor c{buf};
  std::string magic = c.str(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0)
    throw IoError(IoCode::WrongMagic, "checkpoint: bad magic in " + path);
  std::uint16_t version = c.u16();
  if (version != kVersion)
    throw IoError(IoCode::BadVersion,
                  "checkpoint: unsupported version " + std::to_string(version));
  std::uint32_t count = c.u32();

  Checkpoint ck;
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    std::uint16_t nlen = c.u16();
    e.name = c.str(nlen);
    c.need(2);
    e.dtype = std::uint8_t(c.buf[c.pos++]);
    std::uint8_t rank = std::uint8_t(c.buf[c.pos++]);
    for (std::uint8_t r = 0; r < rank; ++r) e.dims.push_back(std::size_t(c.u64()));
    std::size_t n = e.count();
    switch (e.dtype) {
      case 0: {
        std::string bytes = c.str(n);
        e.u8.assign(bytes.begin(), bytes.end());
        break;
      }
      case 1:
        e.f64.resize(n);
        for (std::size_t j = 0; j < n; ++j) e.f64[j] = double(c.f32());
        break;
      case 2:
        e.f64.resize(n);
        for (std::size_t j = 0; j < n; ++j) e.f64[j] = c.f64();
        break;
      default:
        throw IoError(IoCode::DimMismatch,
                      "checkpoint: unknown dtype tag " + std::to_string(e.dtype) +
                          " for '" + e.name + "'");
    }
    ck.entries.push_back(std::move(e));
  }
  if (c.pos != buf.size())
    throw IoError(IoCode::LengthMismatch,
                  "checkpoint: " + std::to_string(buf.size() - c.pos) +
                      " trailing bytes in " + path);
  return ck;
}

}  // namespace binquant

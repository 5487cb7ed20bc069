#include "pio/array_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "container layout assumes a little-endian host");

namespace pio {

namespace {

void put_u32(std::ofstream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_u64(std::ofstream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_header(std::ofstream& out, const std::string& name, uint8_t dtype,
                const std::vector<int64_t>& dims) {
  put_u32(out, static_cast<uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  out.put(static_cast<char>(dtype));
  out.put(static_cast<char>(dims.size()));
  for (int64_t d : dims) put_u64(out, static_cast<uint64_t>(d));
}

struct Reader {
  std::ifstream in;
  std::string path;

  explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
    if (!in) throw std::runtime_error("cannot open " + p);
  }

  void raw(void* dst, size_t n) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n))
      throw std::runtime_error("truncated container: " + path);
  }

  uint32_t u32() {
    uint32_t v;
    raw(&v, sizeof v);
    return v;
  }

  uint64_t u64() {
    uint64_t v;
    raw(&v, sizeof v);
    return v;
  }

  uint8_t u8() {
    uint8_t v;
    raw(&v, sizeof v);
    return v;
  }
};

}  // namespace

void save_archive(const std::string& path, const ArchiveContent& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write("NAC1", 4);
  put_u32(out, static_cast<uint32_t>(content.arrays.size() + content.ints.size() +
                                     content.texts.size()));
  for (const auto& [name, arr] : content.arrays) {
    put_header(out, name, 0, arr.shape());
    out.write(reinterpret_cast<const char*>(arr.data()),
              static_cast<std::streamsize>(arr.size() * sizeof(double)));
  }
  for (const auto& [name, vals] : content.ints) {
    put_header(out, name, 1, {static_cast<int64_t>(vals.size())});
    out.write(reinterpret_cast<const char*>(vals.data()),
              static_cast<std::streamsize>(vals.size() * sizeof(int64_t)));
  }
  for (const auto& [name, text] : content.texts) {
    put_header(out, name, 2, {static_cast<int64_t>(text.size())});
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

ArchiveContent load_archive(const std::string& path) {
  Reader r(path);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, "NAC1", 4) != 0)
    throw std::runtime_error("not a named-array container: " + path);
  const uint32_t count = r.u32();
  ArchiveContent content;
  for (uint32_t e = 0; e < count; ++e) {
    const uint32_t name_len = r.u32();
    if (name_len > (1u << 20)) throw std::runtime_error("corrupt entry name: " + path);
    std::string name(name_len, '\0');
    r.raw(name.data(), name_len);
    const uint8_t dtype = r.u8();
    const uint8_t ndim = r.u8();
    std::vector<int64_t> dims(ndim);
    int64_t total = 1;
    for (auto& d : dims) {
      d = static_cast<int64_t>(r.u64());
      if (d < 0 || (total > 0 && d > (int64_t(1) << 40) / std::max<int64_t>(total, 1)))
        throw std::runtime_error("corrupt entry dims: " + path);
      total *= d;
    }
    switch (dtype) {
      case 0: {
        Array arr(dims);
        r.raw(arr.data(), static_cast<size_t>(total) * sizeof(double));
        content.arrays.emplace(std::move(name), std::move(arr));
        break;
      }
      case 1: {
        if (ndim != 1) throw std::runtime_error("i64 entries must be 1-D: " + path);
        std::vector<int64_t> vals(static_cast<size_t>(total));
        r.raw(vals.data(), static_cast<size_t>(total) * sizeof(int64_t));
        content.ints.emplace(std::move(name), std::move(vals));
        break;
      }
      case 2: {
        if (ndim != 1) throw std::runtime_error("text entries must be 1-D: " + path);
        std::string text(static_cast<size_t>(total), '\0');
        r.raw(text.data(), static_cast<size_t>(total));
        content.texts.emplace(std::move(name), std::move(text));
        break;
      }
      default:
        throw std::runtime_error("unknown entry dtype in " + path);
    }
  }
  return content;
}

}  // namespace pio

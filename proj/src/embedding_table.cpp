#include "usuc/embedding_table.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "usuc/error.hpp"
#include "usuc/text.hpp"

static_assert(std::endian::native == std::endian::little,
              "table format is little-endian; big-endian hosts unsupported");

namespace usuc {

namespace {

constexpr char kMagic[8] = {'N', 'G', 'E', 'M', 'B', 'T', '0', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint64_t kHeaderSize = 32;
constexpr std::uint64_t kIndexRecordSize = 20;  // u64 off, u32 len, u64 ordinal

std::uint64_t align8(std::uint64_t v) { return (v + 7) & ~std::uint64_t{7}; }

void put_u32(std::string& buf, std::uint32_t v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_u64(std::string& buf, std::uint64_t v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, sizeof(v));
  return v;
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v;
  std::memcpy(&v, p, sizeof(v));
  return v;
}

std::uint32_t token_count(std::string_view canonical) {
  if (canonical.empty()) return 0;
  return static_cast<std::uint32_t>(
      std::count(canonical.begin(), canonical.end(), ' ') + 1);
}

[[noreturn]] void line_error(std::size_t line, const std::string& what) {
  throw data_error("dump line " + std::to_string(line) + ": " + what);
}

}  // namespace

Dump parse_text_dump(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw data_error("dump line 1: missing header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::uint64_t declared = 0;
  std::uint32_t dim = 0;
  {
    std::size_t pos = line.find(' ');
    if (pos == std::string::npos) line_error(1, "malformed header '" + line + "'");
    char* end = nullptr;
    errno = 0;
    unsigned long long c = std::strtoull(line.c_str(), &end, 10);
    if (errno != 0 || end != line.c_str() + pos) {
      line_error(1, "malformed header entry count");
    }
    errno = 0;
    unsigned long long d = std::strtoull(line.c_str() + pos + 1, &end, 10);
    if (errno != 0 || end != line.c_str() + line.size() || d == 0) {
      line_error(1, "malformed header dim");
    }
    declared = c;
    dim = static_cast<std::uint32_t>(d);
  }

  Dump dump;
  dump.dim = dim;
  if (declared < (1u << 24)) dump.entries.reserve(declared);

  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) line_error(line_no, "missing TAB separator");

    TokenSeq tokens = normalize_tokens(std::string_view(line).substr(0, tab));
    if (tokens.empty()) line_error(line_no, "empty n-gram key");
    std::string key = canonical_key(tokens);
    if (!seen.insert(key).second) {
      line_error(line_no, "duplicate key '" + key + "'");
    }

    std::vector<float> vec;
    vec.reserve(dim);
    const char* p = line.c_str() + tab + 1;
    const char* line_end = line.c_str() + line.size();
    while (p < line_end) {
      while (p < line_end && *p == ' ') ++p;
      if (p == line_end) break;
      char* end = nullptr;
      errno = 0;
      float v = std::strtof(p, &end);
      if (end == p || errno == ERANGE) {
        line_error(line_no, "malformed vector value");
      }
      if (!std::isfinite(v)) line_error(line_no, "non-finite vector value");
      vec.push_back(v);
      p = end;
    }
    if (vec.size() != dim) {
      line_error(line_no, "vector arity " + std::to_string(vec.size()) +
                              " != dim " + std::to_string(dim));
    }
    dump.entries.push_back(TableEntry{std::move(key), std::move(vec)});
  }

  if (dump.entries.size() != declared) {
    throw data_error("dump: header declares " + std::to_string(declared) +
                     " entries but file has " +
                     std::to_string(dump.entries.size()));
  }
  return dump;
}

void build_table(std::span<const TableEntry> entries, std::uint32_t dim,
                 std::uint32_t max_order, const std::filesystem::path& out) {
  if (dim == 0) throw data_error("build_table: dim must be >= 1");
  if (max_order == 0) throw data_error("build_table: max_order must be >= 1");

  std::vector<std::uint64_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
    return entries[a].key < entries[b].key;
  });

  for (std::size_t i = 0; i < order.size(); ++i) {
    const TableEntry& e = entries[order[i]];
    if (e.key.empty()) throw data_error("build_table: empty key");
    if (token_count(e.key) > max_order) {
      throw data_error("build_table: key '" + e.key + "' exceeds max_order " +
                       std::to_string(max_order));
    }
    if (e.vector.size() != dim) {
      throw data_error("build_table: key '" + e.key + "' has vector arity " +
                       std::to_string(e.vector.size()) + " != dim " +
                       std::to_string(dim));
    }
    if (i > 0 && entries[order[i - 1]].key == e.key) {
      throw data_error("build_table: duplicate key '" + e.key + "'");
    }
  }

  const std::uint64_t n = entries.size();
  std::string header;
  header.append(kMagic, sizeof(kMagic));
  put_u32(header, kVersion);
  put_u32(header, dim);
  put_u32(header, max_order);
  put_u32(header, 0);  // reserved
  put_u64(header, n);

  std::string index;
  index.reserve(n * kIndexRecordSize);
  std::uint64_t key_off = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const TableEntry& e = entries[order[i]];
    put_u64(index, key_off);
    put_u32(index, static_cast<std::uint32_t>(e.key.size()));
    put_u64(index, i);  // vectors are written in sorted order too
    key_off += e.key.size();
  }

  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw usuc::runtime_error("build_table: cannot open '" + out.string() + "' for writing");

  auto pad_to8 = [&f](std::uint64_t written) {
    static const char zeros[8] = {};
    std::uint64_t pad = align8(written) - written;
    if (pad > 0) f.write(zeros, static_cast<std::streamsize>(pad));
    return align8(written);
  };

  f.write(header.data(), static_cast<std::streamsize>(header.size()));
  f.write(index.data(), static_cast<std::streamsize>(index.size()));
  std::uint64_t pos = pad_to8(kHeaderSize + index.size());

  for (std::uint64_t i : order) {
    const std::string& k = entries[i].key;
    f.write(k.data(), static_cast<std::streamsize>(k.size()));
    pos += k.size();
  }
  pad_to8(pos);

  // Sorted vector order keeps the file byte-deterministic for any input
  // ordering of the same entry set.
  for (std::uint64_t i : order) {
    const std::vector<float>& v = entries[i].vector;
    f.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
  }
  f.flush();
  if (!f) throw usuc::runtime_error("build_table: write failed for '" + out.string() + "'");
}

NgramTable NgramTable::open(const std::filesystem::path& path) {
  int fd = ::open(path.c_str(), O_RDONLY);
  if (fd < 0) {
    throw data_error("open_table: cannot open '" + path.string() + "': " +
                     std::strerror(errno));
  }
  struct stat st{};
  if (fstat(fd, &st) != 0) {
    int err = errno;
    ::close(fd);
    throw usuc::runtime_error("open_table: fstat failed: " + std::string(std::strerror(err)));
  }
  const std::uint64_t size = static_cast<std::uint64_t>(st.st_size);
  if (size < kHeaderSize) {
    ::close(fd);
    throw data_error("open_table: '" + path.string() + "' truncated (smaller than header)");
  }
  void* mem = mmap(nullptr, size, PROT_READ, MAP_PRIVATE, fd, 0);
  ::close(fd);
  if (mem == MAP_FAILED) {
    throw usuc::runtime_error("open_table: mmap failed: " + std::string(std::strerror(errno)));
  }

  NgramTable t;
  t.path_ = path;
  t.base_ = static_cast<const unsigned char*>(mem);
  t.mapped_size_ = size;

  if (std::memcmp(t.base_, kMagic, sizeof(kMagic)) != 0) {
    throw data_error("open_table: '" + path.string() + "' has bad magic");
  }
  std::uint32_t version = get_u32(t.base_ + 8);
  if (version != kVersion) {
    throw data_error("open_table: unsupported version " + std::to_string(version));
  }
  t.dim_ = get_u32(t.base_ + 12);
  t.max_order_ = get_u32(t.base_ + 16);
  std::uint32_t reserved = get_u32(t.base_ + 20);
  t.entry_count_ = get_u64(t.base_ + 24);
  if (t.dim_ == 0 || t.max_order_ == 0 || reserved != 0) {
    throw data_error("open_table: corrupt header in '" + path.string() + "'");
  }

  t.index_off_ = kHeaderSize;
  if (t.entry_count_ > (size - kHeaderSize) / kIndexRecordSize) {
    throw data_error("open_table: '" + path.string() + "' truncated in index section");
  }
  const std::uint64_t index_end = t.index_off_ + t.entry_count_ * kIndexRecordSize;
  t.key_blob_off_ = align8(index_end);
  if (t.key_blob_off_ > size) {
    throw data_error("open_table: '" + path.string() + "' truncated in index section");
  }

  // The key blob's extent comes from the last index record; keys are laid
  // out in index order so the last record ends the blob.
  t.key_blob_size_ = 0;
  if (t.entry_count_ > 0) {
    const unsigned char* last =
        t.base_ + t.index_off_ + (t.entry_count_ - 1) * kIndexRecordSize;
    t.key_blob_size_ = get_u64(last) + get_u32(last + 8);
  }
  t.vector_off_ = align8(t.key_blob_off_ + t.key_blob_size_);
  const std::uint64_t vec_stride = static_cast<std::uint64_t>(t.dim_) * sizeof(float);
  if (t.vector_off_ > size || t.entry_count_ > (size - t.vector_off_) / vec_stride) {
    throw data_error("open_table: '" + path.string() + "' truncated in vector section");
  }
  const std::uint64_t expected = t.vector_off_ + t.entry_count_ * vec_stride;
  if (expected != size) {
    throw data_error("open_table: '" + path.string() + "' size " +
                     std::to_string(size) + " does not match header (expected " +
                     std::to_string(expected) + ")");
  }
  return t;
}

NgramTable::NgramTable(NgramTable&& other) noexcept { *this = std::move(other); }

NgramTable& NgramTable::operator=(NgramTable&& other) noexcept {
  if (this != &other) {
    unmap();
    path_ = std::move(other.path_);
    base_ = other.base_;
    mapped_size_ = other.mapped_size_;
    dim_ = other.dim_;
    max_order_ = other.max_order_;
    entry_count_ = other.entry_count_;
    index_off_ = other.index_off_;
    key_blob_off_ = other.key_blob_off_;
    key_blob_size_ = other.key_blob_size_;
    vector_off_ = other.vector_off_;
    other.base_ = nullptr;
    other.mapped_size_ = 0;
  }
  return *this;
}

NgramTable::~NgramTable() { unmap(); }

void NgramTable::unmap() noexcept {
  if (base_ != nullptr) {
    munmap(const_cast<unsigned char*>(base_), mapped_size_);
    base_ = nullptr;
    mapped_size_ = 0;
  }
}

std::string_view NgramTable::key_at(std::uint64_t i) const {
  const unsigned char* rec = base_ + index_off_ + i * kIndexRecordSize;
  const std::uint64_t off = get_u64(rec);
  const std::uint32_t len = get_u32(rec + 8);
  if (off + len > key_blob_size_) {
    throw data_error("table '" + path_.string() + "': corrupt index record");
  }
  return std::string_view(
      reinterpret_cast<const char*>(base_ + key_blob_off_ + off), len);
}

std::span<const float> NgramTable::vector_at(std::uint64_t i) const {
  const unsigned char* rec = base_ + index_off_ + i * kIndexRecordSize;
  const std::uint64_t ordinal = get_u64(rec + 12);
  if (ordinal >= entry_count_) {
    throw data_error("table '" + path_.string() + "': corrupt vector ordinal");
  }
  const float* v = reinterpret_cast<const float*>(
      base_ + vector_off_ + ordinal * dim_ * sizeof(float));
  return std::span<const float>(v, dim_);
}

std::optional<std::span<const float>> NgramTable::find(
    std::string_view canonical) const {
  std::uint64_t lo = 0;
  std::uint64_t hi = entry_count_;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    const std::string_view k = key_at(mid);
    if (k < canonical) {
      lo = mid + 1;
    } else if (canonical < k) {
      hi = mid;
    } else {
      return vector_at(mid);
    }
  }
  return std::nullopt;
}

}  // namespace usuc

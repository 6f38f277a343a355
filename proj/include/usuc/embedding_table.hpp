#ifndef USUC_EMBEDDING_TABLE_HPP
#define USUC_EMBEDDING_TABLE_HPP

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace usuc {

// One n-gram -> vector pair. The key is in canonical form (normalized
// tokens joined by single spaces).
struct TableEntry {
  std::string key;
  std::vector<float> vector;
};

// Parsed text dump: header `<entry_count> <dim>` followed by one
// `key<TAB>v1 v2 ... vdim` line per entry.
struct Dump {
  std::uint32_t dim = 0;
  std::vector<TableEntry> entries;
};

// Reads and validates a text dump. Tokens are re-normalized (lowercased);
// all errors report the offending line number.
Dump parse_text_dump(std::istream& in);

// Writes the binary table file. Entries are sorted by canonical key bytes,
// so the output is byte-deterministic for a given entry set regardless of
// input order. Throws on duplicate keys, keys longer than max_order tokens,
// vector arity mismatches and I/O failures.
void build_table(std::span<const TableEntry> entries, std::uint32_t dim,
                 std::uint32_t max_order, const std::filesystem::path& out);

// Immutable handle over a memory-mapped table file. Opening validates the
// header and overall file size but never touches the vector payload, so it
// runs in time independent of entry_count. Lookups binary-search the sorted
// key index. Safe to share across threads once constructed.
class NgramTable {
 public:
  static NgramTable open(const std::filesystem::path& path);

  NgramTable(NgramTable&& other) noexcept;
  NgramTable& operator=(NgramTable&& other) noexcept;
  NgramTable(const NgramTable&) = delete;
  NgramTable& operator=(const NgramTable&) = delete;
  ~NgramTable();

  std::uint32_t dim() const { return dim_; }
  std::uint32_t max_order() const { return max_order_; }
  std::uint64_t entry_count() const { return entry_count_; }
  const std::filesystem::path& path() const { return path_; }

  // Returns the stored vector, bit-identical, or nullopt if absent.
  std::optional<std::span<const float>> find(std::string_view canonical) const;

  // Index-order accessors (keys ascend in canonical byte order).
  std::string_view key_at(std::uint64_t i) const;
  std::span<const float> vector_at(std::uint64_t i) const;

 private:
  NgramTable() = default;
  void unmap() noexcept;

  std::filesystem::path path_;
  const unsigned char* base_ = nullptr;
  std::uint64_t mapped_size_ = 0;
  std::uint32_t dim_ = 0;
  std::uint32_t max_order_ = 0;
  std::uint64_t entry_count_ = 0;
  std::uint64_t index_off_ = 0;
  std::uint64_t key_blob_off_ = 0;
  std::uint64_t key_blob_size_ = 0;
  std::uint64_t vector_off_ = 0;
};

}  // namespace usuc

#endif  // USUC_EMBEDDING_TABLE_HPP

#pragma once

// CSV persistence for computed constants.  The file carries one row per
// (kind, k, q, P) key with the schema
//
//   kind,k,q,P,value,vanished,reducible,schema_version
//
// Values print with %.17g so doubles round-trip exactly.  Rows whose
// schema version differs from the current one are ignored on load.  A
// loaded file is read once at startup; after that an appender hooked to
// the store writes each newly computed constant as a single O_APPEND
// write, so concurrent computations never interleave bytes of a row.

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "primepair/constants.hpp"

namespace primepair {

inline constexpr int kCacheSchemaVersion = 1;
inline constexpr std::string_view kCacheHeader = "kind,k,q,P,value,vanished,reducible,schema_version";
inline constexpr std::string_view kCacheFileName = "constants.csv";

namespace detail {

inline const char* kind_name(ConstantKind kind) {
  switch (kind) {
    case ConstantKind::HardyLittlewood: return "hardy-littlewood";
    case ConstantKind::PairAdjusted: return "pair-adjusted";
    case ConstantKind::SingleGamma: return "single-gamma";
  }
  return "unknown";
}

inline std::optional<ConstantKind> kind_from_name(std::string_view name) {
  if (name == "hardy-littlewood") return ConstantKind::HardyLittlewood;
  if (name == "pair-adjusted") return ConstantKind::PairAdjusted;
  if (name == "single-gamma") return ConstantKind::SingleGamma;
  return std::nullopt;
}

inline std::string cache_row(const ConstantKey& key, const EulerProductEstimate& est) {
  char buf[192];
  std::snprintf(buf, sizeof buf, "%s,%u,%lld,%llu,%.17g,%d,%d,%d\n", kind_name(key.kind), key.k,
                static_cast<long long>(key.q), static_cast<unsigned long long>(key.truncation_bound),
                est.value, est.vanished ? 1 : 0, est.reducible ? 1 : 0, kCacheSchemaVersion);
  return buf;
}

}  // namespace detail

// Reads a cache file into the store.  Returns the number of rows kept.
// A missing file is an empty cache; a file with a different header is
// refused.  Call this before attaching an appender, otherwise every
// loaded row would be written back out.
inline std::size_t load_constant_cache(const std::filesystem::path& file, ConstantStore& store) {
  std::ifstream in(file);
  if (!in) return 0;
  std::string line;
  if (!std::getline(in, line)) return 0;
  if (line != kCacheHeader)
    throw std::runtime_error("constant cache " + file.string() + " has an unrecognized header");
  std::size_t kept = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field[8];
    for (int i = 0; i < 8; ++i)
      if (!std::getline(row, field[i], ','))
        throw std::runtime_error("constant cache " + file.string() + ": short row at line " +
                                 std::to_string(lineno));
    try {
      if (std::stoi(field[7]) != kCacheSchemaVersion) continue;
      auto kind = detail::kind_from_name(field[0]);
      if (!kind) continue;
      ConstantKey key{*kind, static_cast<unsigned>(std::stoul(field[1])), std::stoll(field[2]),
                      std::stoull(field[3])};
      EulerProductEstimate est;
      est.value = std::stod(field[4]);
      est.truncation_bound = key.truncation_bound;
      est.factors_used = 0;  // not persisted
      est.vanished = std::stoi(field[5]) != 0;
      est.reducible = std::stoi(field[6]) != 0;
      store.put(key, est);
      ++kept;
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("constant cache " + file.string() + ": bad field at line " +
                               std::to_string(lineno));
    } catch (const std::out_of_range&) {
      throw std::runtime_error("constant cache " + file.string() + ": bad field at line " +
                               std::to_string(lineno));
    }
  }
  return kept;
}

// Owns an append-only handle on a cache file and mirrors every new store
// insert into it.  Detaches its hook on destruction, so it must outlive
// all computations that should be persisted.
class CacheAppender {
 public:
  CacheAppender() = default;

  CacheAppender(const CacheAppender&) = delete;
  CacheAppender& operator=(const CacheAppender&) = delete;

  ~CacheAppender() { detach(); }

  void attach(const std::filesystem::path& file, ConstantStore& store) {
    detach();
    fd_ = ::open(file.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd_ < 0)
      throw std::runtime_error("constant cache " + file.string() + " cannot be opened for append");
    if (::lseek(fd_, 0, SEEK_END) == 0) {
      std::string header = std::string(kCacheHeader) + "\n";
      write_all(header);
    }
    store_ = &store;
    store.set_insert_hook([this](const ConstantKey& key, const EulerProductEstimate& est) {
      std::lock_guard lock(mutex_);
      write_all(detail::cache_row(key, est));
    });
  }

  void detach() {
    if (store_) {
      store_->set_insert_hook({});
      store_ = nullptr;
    }
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

  bool attached() const { return store_ != nullptr; }

 private:
  void write_all(const std::string& text) {
    const char* data = text.data();
    std::size_t left = text.size();
    while (left > 0) {
      ssize_t n = ::write(fd_, data, left);
      if (n < 0) throw std::runtime_error("constant cache append failed");
      data += n;
      left -= static_cast<std::size_t>(n);
    }
  }

  int fd_ = -1;
  ConstantStore* store_ = nullptr;
  std::mutex mutex_;
};

}  // namespace primepair

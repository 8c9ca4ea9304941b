#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cfpred::ingest {

enum class Verdict { OK, WRONG_ANSWER, TIME_LIMIT, MEMORY_LIMIT, RUNTIME_ERROR, COMPILATION_ERROR, OTHER };
enum class ParticipantType { CONTESTANT, PRACTICE, VIRTUAL, OUT_OF_COMPETITION, OTHER };

/// Unknown strings map to OTHER; the live API grows new verdict values over time.
Verdict parse_verdict(std::string_view s);
ParticipantType parse_participant_type(std::string_view s);
std::string_view verdict_name(Verdict v);
std::string_view participant_type_name(ParticipantType p);

/// One rated contest participation, from `user.rating`.
struct RatingChange {
  std::int64_t contest_id = 0;
  std::string contest_name;
  int rank = 0;
  int old_rating = 0;
  int new_rating = 0;
  std::int64_t update_time = 0; ///< unix seconds of the rating update

  friend bool operator==(const RatingChange&, const RatingChange&) = default;
};

/// One judged submission, from `user.status`.
struct Submission {
  std::int64_t submission_id = 0;
  std::int64_t contest_id = 0;
  std::string problem_key; ///< "<contest_id>/<index>", e.g. "1234/A"
  std::int64_t creation_time = 0;
  Verdict verdict = Verdict::OTHER;
  ParticipantType participant_type = ParticipantType::OTHER;

  friend bool operator==(const Submission&, const Submission&) = default;
};

/// One contestant's row of `contest.standings`: total points and rank.
struct StandingsRow {
  std::int64_t contest_id = 0;
  std::string handle;
  double points = 0.0;
  int rank = 0;

  friend bool operator==(const StandingsRow&, const StandingsRow&) = default;
};

/// Blocking HTTP GET abstraction. Implementations throw TransportError on
/// network-level failure and return the raw response body otherwise.
class Transport {
public:
  virtual ~Transport() = default;
  virtual std::string get(const std::string& url) = 0;
};

/// Live HTTPS transport (cpp-httplib + OpenSSL). Constructing it when the
/// build has TLS disabled throws TransportError.
class HttpTransport : public Transport {
public:
  explicit HttpTransport(std::string host = "codeforces.com", int timeout_seconds = 30);
  std::string get(const std::string& url) override;

private:
  std::string host_;
  int timeout_seconds_;
};

/// Test transport: canned URL -> body map, recording every request.
class FixtureTransport : public Transport {
public:
  void add(std::string url, std::string body);
  /// Loads the body from a file on first use.
  void add_file(std::string url, std::filesystem::path file);
  std::string get(const std::string& url) override;
  const std::vector<std::string>& requests() const { return requests_; }

private:
  std::map<std::string, std::string> responses_;
  std::map<std::string, std::filesystem::path> files_;
  std::vector<std::string> requests_;
};

/// Serializes request issue so that no two acquisitions happen closer than
/// the configured interval. Clock and sleep are injectable for tests.
class RateLimiter {
public:
  using NowFn = std::function<std::int64_t()>;   ///< monotonic milliseconds
  using SleepFn = std::function<void(std::int64_t)>;

  explicit RateLimiter(std::int64_t interval_ms);
  RateLimiter(std::int64_t interval_ms, NowFn now, SleepFn sleep);

  /// Blocks until at least interval_ms has passed since the previous acquire.
  void acquire();
  std::int64_t interval_ms() const { return interval_ms_; }

private:
  std::int64_t interval_ms_;
  NowFn now_;
  SleepFn sleep_;
  std::mutex mutex_;
  std::int64_t next_allowed_ms_ = 0;
  bool primed_ = false;
};

/// One file per request under <dir>/<method>/<arg-hash>.json, raw response
/// bytes. Writes go to a temp file first and are renamed into place, so a
/// key is either absent or complete.
class CacheStore {
public:
  explicit CacheStore(std::filesystem::path dir);
  std::optional<std::string> get(const std::string& method, const std::string& args) const;
  void put(const std::string& method, const std::string& args, std::string_view payload) const;
  std::filesystem::path path_for(const std::string& method, const std::string& args) const;
  const std::filesystem::path& dir() const { return dir_; }

private:
  std::filesystem::path dir_;
};

struct ApiClientOptions {
  std::string base_url = "https://codeforces.com/api/";
  bool offline = false; ///< forbid network use; every fetch must hit the cache
  int page_size = 1000; ///< user.status page size
};

/// Cache-first client for the Codeforces public API. Every raw response is
/// written to the cache before parsing; a warm cache satisfies all fetches
/// offline and repeat fetches never touch the network.
class ApiClient {
public:
  ApiClient(std::shared_ptr<Transport> transport, std::shared_ptr<RateLimiter> limiter,
            CacheStore cache, ApiClientOptions options = {});

  /// All rating changes for the handle, ascending by update_time.
  std::vector<RatingChange> fetch_rating_history(const std::string& handle);
  /// The handle's full submission list (paginated fetch until exhausted),
  /// ascending by creation_time, unique by submission_id.
  std::vector<Submission> fetch_submissions(const std::string& handle);
  /// Total contest points and rank for the handle in one contest.
  StandingsRow fetch_standings_row(std::int64_t contest_id, const std::string& handle);

  const CacheStore& cache() const { return cache_; }

private:
  std::string fetch_raw(const std::string& method, const std::string& query);

  std::shared_ptr<Transport> transport_;
  std::shared_ptr<RateLimiter> limiter_;
  CacheStore cache_;
  ApiClientOptions options_;
};

/// FNV-1a 64-bit hash; used for cache file names and dataset provenance.
std::uint64_t fnv1a64(std::string_view bytes);

/// Reads a newline-delimited handle list; blank lines and lines starting
/// with '#' are skipped.
std::vector<std::string> read_handles_file(const std::filesystem::path& path);

} // namespace cfpred::ingest

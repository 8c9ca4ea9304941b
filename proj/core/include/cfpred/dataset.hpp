#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cfpred/ingest.hpp"
#include "cfpred/matrix.hpp"

namespace cfpred::dataset {

/// Feature layout per timestamp. BASE = [rating, rank, solve_rating];
/// WITH_PRACTICE appends [ac_count, wa_count]. The rating component is
/// always feature 0.
enum class FeatureMode : std::uint8_t { BASE = 0, WITH_PRACTICE = 1 };

constexpr int kRatingFeature = 0;

int feature_count(FeatureMode mode);
std::string_view feature_mode_name(FeatureMode mode);

/// One rated contest of one contestant, with the practice counts from the
/// window between the previous contest and this one.
struct TimestampFeatures {
  std::int64_t contest_id = 0;
  std::int64_t contest_time = 0; ///< unix seconds, strictly increasing per contestant
  double rating = 0.0;           ///< post-contest rating
  double rank = 0.0;
  double solve_rating = 0.0;     ///< contest points
  double ac_count = 0.0;         ///< distinct problems solved since the previous contest
  double wa_count = 0.0;         ///< distinct problems attempted but unsolved in that window

  friend bool operator==(const TimestampFeatures&, const TimestampFeatures&) = default;
};

struct Timeline {
  std::string tag; ///< contestant handle or synthetic id
  std::vector<TimestampFeatures> entries;
};

/// One training example: window-1 consecutive timestamps as input, the next
/// one as target. Values are in scaled space once apply_scaler has run;
/// target_prev_rating stays in raw rating units for direction metrics.
struct SequenceSample {
  nn::Matrix inputs;  ///< (window-1) x F
  nn::Matrix target;  ///< 1 x F
  std::uint32_t contestant_tag = 0;
  double target_prev_rating = 0.0;

  friend bool operator==(const SequenceSample&, const SequenceSample&) = default;
};

/// Per-feature min-max scaler fitted on training data. Degenerate features
/// (max == min) pass through unchanged in both directions.
struct FeatureScaler {
  std::vector<double> feature_min;
  std::vector<double> feature_max;

  int features() const { return static_cast<int>(feature_min.size()); }
  double transform_value(double v, int feature) const;
  double invert_value(double v, int feature) const;
  nn::Matrix transform(const nn::Matrix& rows) const;
  nn::Matrix invert(const nn::Matrix& rows) const;

  friend bool operator==(const FeatureScaler&, const FeatureScaler&) = default;
};

struct DatasetBundle {
  std::vector<SequenceSample> train;
  std::vector<SequenceSample> test;
  FeatureScaler scaler;
  FeatureMode feature_mode = FeatureMode::BASE;
  std::uint64_t split_seed = 0;
  std::uint32_t window = 16;
  std::vector<std::string> tags; ///< contestant_tag -> name

  friend bool operator==(const DatasetBundle&, const DatasetBundle&) = default;
};

/// Builds the per-contest feature timeline for one contestant. ratings must
/// be chronological (throws NonChronologicalInput otherwise). The practice
/// window for contest k is (previous update_time, contest start], where the
/// start is the earliest in-contest submission time, falling back to
/// update_time minus 5 hours; the first contest's window opens at the
/// account's earliest submission. In-contest submissions never count as
/// practice; AC/WA count distinct problems only.
std::vector<TimestampFeatures> build_timeline(
    const std::vector<ingest::RatingChange>& ratings,
    const std::vector<ingest::Submission>& submissions,
    const std::map<std::int64_t, ingest::StandingsRow>& standings);

/// Sliding windows with stride 1: a timeline of length L yields
/// max(0, L - window + 1) samples, each with window-1 input rows and the
/// following entry as target. Values are unscaled.
std::vector<SequenceSample> make_sequences(const std::vector<TimestampFeatures>& timeline,
                                           int window, FeatureMode mode,
                                           std::uint32_t contestant_tag = 0);

/// Fits per-feature min/max over all train input rows and train targets.
/// Throws EmptyTrainingSet when train_samples is empty.
FeatureScaler fit_scaler(std::span<const SequenceSample> train_samples);
/// Scales inputs and target of every sample in place.
void apply_scaler(const FeatureScaler& scaler, std::vector<SequenceSample>& samples);
/// Maps one scaled feature vector back to raw units.
std::vector<double> invert_scaler(const FeatureScaler& scaler, std::span<const double> values);

struct SplitOptions {
  double ratio = 0.8;
  std::uint64_t seed = 0;
  bool by_user = false; ///< assign whole contestants to one side (leakage-safe)
};

/// Deterministic shuffle under the seed, then split at round(ratio * N).
/// by_user mode shuffles contestant tags instead and assigns whole
/// contestants to the training side until the target count is reached.
std::pair<std::vector<SequenceSample>, std::vector<SequenceSample>>
split_dataset(std::vector<SequenceSample> samples, const SplitOptions& options);

/// make_sequences + split + scaler fit/apply over a set of timelines.
DatasetBundle build_bundle(const std::vector<Timeline>& timelines, int window, FeatureMode mode,
                           const SplitOptions& split);

/// Synthetic timelines for desk-scale verification. Each contestant has a
/// fixed practice propensity; the rating delta at contest t is
/// practice_effect * ac_t plus zero-mean Gaussian noise, and within one
/// synthetic contest a higher solve rating always means a better rank.
/// Identical seeds produce bit-identical timelines.
std::vector<Timeline> generate_synthetic_timelines(int n_users, int length, std::uint64_t seed,
                                                   double practice_effect);

/// Binary dataset file, magic "CFSEQ001". Round-trips bit-exactly.
void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& path);
DatasetBundle load_dataset(const std::filesystem::path& path);

/// FNV-1a 64 over the bundle's serialized payload; recorded in checkpoint
/// provenance.
std::uint64_t bundle_hash(const DatasetBundle& bundle);

/// CSV export of one timeline, columns:
/// contest_id,contest_time,rating,rank,solve_rating,ac_count,wa_count
std::string timeline_csv(const std::vector<TimestampFeatures>& timeline);

} // namespace cfpred::dataset

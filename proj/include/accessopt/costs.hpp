#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "accessopt/geo.hpp"

namespace accessopt::costs {

enum class CostKind { distance_m, duration_s };

const char* cost_kind_name(CostKind k);

// Directional pairwise travel costs between region centers. Values are not
// symmetrized; transit times depend on direction.
struct CostMatrix {
  CostKind kind = CostKind::distance_m;
  std::size_t n = 0;
  std::vector<double> values;         // row-major n*n
  std::vector<std::uint8_t> missing;  // cells the provider failed on (imputed)
  std::string provider;
  std::string departure;  // civil datetime text used for the queries

  double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * n + j]; }
  bool is_missing(std::size_t i, std::size_t j) const { return missing[i * n + j] != 0; }
  std::size_t missing_count() const;
};

struct CostCell {
  double distance_m = 0.0;
  double duration_s = 0.0;
  bool ok = false;
};

// Pluggable source of pairwise travel costs. Implementations return one cell
// per origin x destination pair in row-major order; cells they cannot answer
// carry ok == false.
class CostProvider {
 public:
  virtual ~CostProvider() = default;
  virtual std::string label() const = 0;
  virtual std::vector<CostCell> query(std::span<const geo::GeoPoint> origins,
                                      std::span<const geo::GeoPoint> destinations,
                                      const std::string& departure) = 0;
};

// Analytic offline provider: distance by haversine, duration = distance/speed.
std::unique_ptr<CostProvider> synthetic_provider(double speed_mps);

// Token bucket limiter with injectable time source, for provider pacing.
class TokenBucket {
 public:
  using ClockFn = std::function<double()>;  // seconds, monotonic
  using SleepFn = std::function<void(double)>;

  TokenBucket(double rate_per_s, double capacity);
  TokenBucket(double rate_per_s, double capacity, ClockFn clock, SleepFn sleep);

  // Blocks (via the sleep function) until a token is available.
  void acquire();

 private:
  double rate_;
  double capacity_;
  double tokens_;
  double last_;
  ClockFn clock_;
  SleepFn sleep_;
};

struct HttpProviderConfig {
  std::string endpoint;  // e.g. http://host:port/path
  std::string api_key_env = "ACCESSOPT_API_KEY";
  // Response field mapping; defaults follow the common rows/elements shape.
  std::string rows_field = "rows";
  std::string elements_field = "elements";
  std::string status_field = "status";
  std::string ok_value = "OK";
  std::string distance_field = "distance_m";
  std::string duration_field = "duration_s";
};

// Generic JSON-over-HTTP distance-matrix client. Posts origins/destinations
// and reads per-pair distance/duration cells; pairs with a non-OK status are
// reported missing. Credentials travel in the X-Api-Key header, read from the
// configured environment variable.
std::unique_ptr<CostProvider> http_provider(const HttpProviderConfig& cfg);

struct BuildOptions {
  std::size_t batch_size = 10;      // origins and destinations per request
  double rate_limit_per_s = 10.0;   // provider request budget
  TokenBucket::ClockFn clock;       // test hooks; real clock when empty
  TokenBucket::SleepFn sleep;
};

struct MatrixPair {
  CostMatrix distance;
  CostMatrix duration;
};

// Queries all ordered center pairs in batches, assembles both matrices,
// then mean-imputes cells the provider failed to answer. Throws Error when
// every batch fails.
MatrixPair build_matrices(const std::vector<geo::GeoPoint>& centers, CostProvider& provider,
                          const std::string& departure, const BuildOptions& opts = {});

// Fills missing off-diagonal cells with the mean of the known off-diagonal
// cells. The diagonal stays zero and the missing mask is preserved for audit.
CostMatrix impute_missing(CostMatrix m);

// Versioned text cache. save/load round-trip is bit-exact.
void save_matrix(const CostMatrix& m, const std::string& path);
CostMatrix load_matrix(const std::string& path);

}  // namespace accessopt::costs

#include "accessopt/costs.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "accessopt/csvio.hpp"
#include "accessopt/errors.hpp"

namespace accessopt::costs {

namespace {

using nlohmann::json;

constexpr const char* kCacheMagic = "accessopt-costmatrix";
constexpr int kCacheVersion = 1;

double wall_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

class SyntheticProvider final : public CostProvider {
 public:
  explicit SyntheticProvider(double speed_mps) : speed_(speed_mps) {
    if (!(speed_mps > 0.0)) throw ValidationError("synthetic provider: speed must be positive");
  }

  std::string label() const override {
    return "synthetic-" + csvio::format_double(speed_) + "mps";
  }

  std::vector<CostCell> query(std::span<const geo::GeoPoint> origins,
                              std::span<const geo::GeoPoint> destinations,
                              const std::string&) override {
    std::vector<CostCell> out;
    out.reserve(origins.size() * destinations.size());
    for (const auto& o : origins) {
      for (const auto& d : destinations) {
        CostCell cell;
        cell.distance_m = geo::haversine_m(o, d);
        cell.duration_s = cell.distance_m / speed_;
        cell.ok = true;
        out.push_back(cell);
      }
    }
    return out;
  }

 private:
  double speed_;
};

class HttpProvider final : public CostProvider {
 public:
  explicit HttpProvider(HttpProviderConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.endpoint.empty()) throw ValidationError("http provider: endpoint not configured");
    const auto scheme_end = cfg_.endpoint.find("://");
    if (scheme_end == std::string::npos) {
      throw ValidationError("http provider: endpoint must include a scheme");
    }
    const auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
    host_ = cfg_.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);
    if (const char* key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
  }

  std::string label() const override { return "http:" + cfg_.endpoint; }

  std::vector<CostCell> query(std::span<const geo::GeoPoint> origins,
                              std::span<const geo::GeoPoint> destinations,
                              const std::string& departure) override {
    json body;
    body["departure"] = departure;
    for (const auto& o : origins) body["origins"].push_back({{"lat", o.lat}, {"lon", o.lon}});
    for (const auto& d : destinations) {
      body["destinations"].push_back({{"lat", d.lat}, {"lon", d.lon}});
    }

    httplib::Client client(host_);
    client.set_read_timeout(30, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("X-Api-Key", api_key_);
    const auto res = client.Post(path_, headers, body.dump(), "application/json");

    std::vector<CostCell> out(origins.size() * destinations.size());
    if (!res || res->status != 200) return out;  // whole batch missing

    json parsed;
    try {
      parsed = json::parse(res->body);
    } catch (const json::exception&) {
      return out;
    }
    const auto rows = parsed.find(cfg_.rows_field);
    if (rows == parsed.end() || !rows->is_array()) return out;
    for (std::size_t r = 0; r < origins.size() && r < rows->size(); ++r) {
      const auto& row = (*rows)[r];
      const auto elements = row.find(cfg_.elements_field);
      if (elements == row.end() || !elements->is_array()) continue;
      for (std::size_t c = 0; c < destinations.size() && c < elements->size(); ++c) {
        const auto& el = (*elements)[c];
        if (el.value(cfg_.status_field, "") != cfg_.ok_value) continue;
        const auto dist = el.find(cfg_.distance_field);
        const auto dur = el.find(cfg_.duration_field);
        if (dist == el.end() || dur == el.end()) continue;
        CostCell& cell = out[r * destinations.size() + c];
        cell.distance_m = dist->get<double>();
        cell.duration_s = dur->get<double>();
        if (cell.distance_m >= 0.0 && cell.duration_s >= 0.0) cell.ok = true;
      }
    }
    return out;
  }

 private:
  HttpProviderConfig cfg_;
  std::string host_;
  std::string path_;
  std::string api_key_;
};

}  // namespace

const char* cost_kind_name(CostKind k) {
  return k == CostKind::distance_m ? "distance_m" : "duration_s";
}

std::size_t CostMatrix::missing_count() const {
  std::size_t c = 0;
  for (std::uint8_t m : missing) c += m;
  return c;
}

std::unique_ptr<CostProvider> synthetic_provider(double speed_mps) {
  return std::make_unique<SyntheticProvider>(speed_mps);
}

std::unique_ptr<CostProvider> http_provider(const HttpProviderConfig& cfg) {
  return std::make_unique<HttpProvider>(cfg);
}

TokenBucket::TokenBucket(double rate_per_s, double capacity)
    : TokenBucket(rate_per_s, capacity, wall_seconds,
                  [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); }) {}

TokenBucket::TokenBucket(double rate_per_s, double capacity, ClockFn clock, SleepFn sleep)
    : rate_(rate_per_s),
      capacity_(capacity),
      tokens_(capacity),
      clock_(std::move(clock)),
      sleep_(std::move(sleep)) {
  if (!(rate_per_s > 0.0) || !(capacity >= 1.0)) {
    throw ValidationError("token bucket: rate must be positive, capacity >= 1");
  }
  last_ = clock_();
}

void TokenBucket::acquire() {
  for (;;) {
    const double now = clock_();
    tokens_ = std::min(capacity_, tokens_ + (now - last_) * rate_);
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    sleep_((1.0 - tokens_) / rate_);
  }
}

MatrixPair build_matrices(const std::vector<geo::GeoPoint>& centers, CostProvider& provider,
                          const std::string& departure, const BuildOptions& opts) {
  const std::size_t n = centers.size();
  if (n < 2) throw ValidationError("build_matrices: need at least 2 centers");
  if (opts.batch_size == 0) throw ValidationError("build_matrices: batch_size must be positive");

  MatrixPair out;
  for (CostMatrix* m : {&out.distance, &out.duration}) {
    m->n = n;
    m->values.assign(n * n, 0.0);
    m->missing.assign(n * n, 0);
    m->provider = provider.label();
    m->departure = departure;
  }
  out.distance.kind = CostKind::distance_m;
  out.duration.kind = CostKind::duration_s;

  TokenBucket bucket =
      opts.clock ? TokenBucket(opts.rate_limit_per_s, 1.0, opts.clock, opts.sleep)
                 : TokenBucket(opts.rate_limit_per_s, 1.0);

  std::size_t failed_batches = 0;
  std::size_t total_batches = 0;
  for (std::size_t r0 = 0; r0 < n; r0 += opts.batch_size) {
    const std::size_t rn = std::min(n, r0 + opts.batch_size);
    for (std::size_t c0 = 0; c0 < n; c0 += opts.batch_size) {
      const std::size_t cn = std::min(n, c0 + opts.batch_size);
      bucket.acquire();
      const std::span<const geo::GeoPoint> origins(centers.data() + r0, rn - r0);
      const std::span<const geo::GeoPoint> destinations(centers.data() + c0, cn - c0);
      const auto cells = provider.query(origins, destinations, departure);
      if (cells.size() != origins.size() * destinations.size()) {
        throw Error("provider returned wrong cell count");
      }
      std::size_t off_diag = 0, ok = 0;
      for (std::size_t r = r0; r < rn; ++r) {
        for (std::size_t c = c0; c < cn; ++c) {
          const CostCell& cell = cells[(r - r0) * destinations.size() + (c - c0)];
          if (r == c) continue;  // diagonal is zero by contract
          ++off_diag;
          if (cell.ok && cell.distance_m >= 0.0 && cell.duration_s >= 0.0) {
            out.distance.at(r, c) = cell.distance_m;
            out.duration.at(r, c) = cell.duration_s;
            ++ok;
          } else {
            out.distance.missing[r * n + c] = 1;
            out.duration.missing[r * n + c] = 1;
          }
        }
      }
      if (off_diag > 0) {
        ++total_batches;
        if (ok == 0) ++failed_batches;
      }
    }
  }
  if (total_batches > 0 && failed_batches == total_batches) {
    throw Error("cost provider failed on every batch");
  }

  out.distance = impute_missing(std::move(out.distance));
  out.duration = impute_missing(std::move(out.duration));
  return out;
}

CostMatrix impute_missing(CostMatrix m) {
  if (m.n == 0 || m.values.size() != m.n * m.n || m.missing.size() != m.n * m.n) {
    throw ValidationError("impute_missing: malformed matrix");
  }
  double sum = 0.0;
  std::size_t known = 0;
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < m.n; ++j) {
      if (i == j) continue;
      if (!m.is_missing(i, j)) {
        sum += m.at(i, j);
        ++known;
      }
    }
  }
  if (m.n > 1 && known == 0) throw Error("impute_missing: every off-diagonal cell is missing");
  const double mean = known > 0 ? sum / static_cast<double>(known) : 0.0;
  for (std::size_t i = 0; i < m.n; ++i) {
    m.at(i, i) = 0.0;
    for (std::size_t j = 0; j < m.n; ++j) {
      if (i != j && m.is_missing(i, j)) m.at(i, j) = mean;
    }
  }
  return m;
}

void save_matrix(const CostMatrix& m, const std::string& path) {
  std::ostringstream out;
  out << kCacheMagic << " v" << kCacheVersion << "\n";
  out << "kind " << cost_kind_name(m.kind) << "\n";
  out << "provider " << m.provider << "\n";
  out << "departure " << m.departure << "\n";
  out << "n " << m.n << "\n";
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < m.n; ++j) {
      if (j != 0) out << ' ';
      out << csvio::format_double(m.at(i, j));
    }
    out << '\n';
  }
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < m.n; ++j) {
      if (j != 0) out << ' ';
      out << (m.is_missing(i, j) ? '1' : '0');
    }
    out << '\n';
  }
  csvio::write_file(path, out.str());
}

namespace {

std::string expect_prefix(const std::string& line, const std::string& prefix,
                          const std::string& path) {
  if (line.rfind(prefix, 0) != 0) {
    throw IoError(path + ": corrupt cost matrix cache (expected '" + prefix + "...')");
  }
  return line.substr(prefix.size());
}

}  // namespace

CostMatrix load_matrix(const std::string& path) {
  const auto lines = csvio::read_lines(path);
  if (lines.size() < 5) throw IoError(path + ": truncated cost matrix cache");
  const std::string expected_header = std::string(kCacheMagic) + " v" + std::to_string(kCacheVersion);
  if (lines[0] != expected_header) {
    if (lines[0].rfind(kCacheMagic, 0) == 0) {
      throw IoError(path + ": unsupported cache version '" + lines[0] + "', expected '" +
                    expected_header + "'");
    }
    throw IoError(path + ": not a cost matrix cache");
  }

  CostMatrix m;
  const std::string kind = expect_prefix(lines[1], "kind ", path);
  if (kind == "distance_m") {
    m.kind = CostKind::distance_m;
  } else if (kind == "duration_s") {
    m.kind = CostKind::duration_s;
  } else {
    throw IoError(path + ": unknown cost kind '" + kind + "'");
  }
  m.provider = expect_prefix(lines[2], "provider ", path);
  m.departure = expect_prefix(lines[3], "departure ", path);
  const auto n = csvio::parse_int(expect_prefix(lines[4], "n ", path));
  if (!n || *n < 1) throw IoError(path + ": bad matrix size");
  m.n = static_cast<std::size_t>(*n);

  if (lines.size() < 5 + 2 * m.n) throw IoError(path + ": truncated cost matrix cache");
  m.values.reserve(m.n * m.n);
  for (std::size_t i = 0; i < m.n; ++i) {
    const auto fields = csvio::split(lines[5 + i], ' ');
    if (fields.size() != m.n) throw IoError(path + ": corrupt value row");
    for (const auto& f : fields) {
      const auto v = csvio::parse_double(f);
      if (!v) throw IoError(path + ": corrupt value '" + f + "'");
      m.values.push_back(*v);
    }
  }
  m.missing.reserve(m.n * m.n);
  for (std::size_t i = 0; i < m.n; ++i) {
    const auto fields = csvio::split(lines[5 + m.n + i], ' ');
    if (fields.size() != m.n) throw IoError(path + ": corrupt mask row");
    for (const auto& f : fields) {
      if (f != "0" && f != "1") throw IoError(path + ": corrupt mask cell '" + f + "'");
      m.missing.push_back(f == "1" ? 1 : 0);
    }
  }
  return m;
}

}  // namespace accessopt::costs

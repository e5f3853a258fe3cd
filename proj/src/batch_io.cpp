#include "levy/batch_io.hpp"

#include "levy/samplers.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#ifndef LEVY_VERSION_STRING
#define LEVY_VERSION_STRING "unknown"
#endif

namespace levy {

const char* version_string() { return LEVY_VERSION_STRING; }

namespace io {

static_assert(std::endian::native == std::endian::little,
              "batch files are little-endian; big-endian hosts need byte swapping");

namespace {

constexpr char kMagic[4] = {'L', 'V', 'Y', 'B'};
constexpr std::uint32_t kMaxName = 4096;

template <typename T>
void put(std::string& buf, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  buf.append(bytes, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  void doubles(double* dst, std::size_t n) {
    need(n * sizeof(double));
    std::memcpy(dst, data_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
  }
  bool at_end() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > data_.size() - pos_) throw FormatError("batch file truncated");
  }
  std::string data_;
  std::size_t pos_ = 0;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void check_values(const LevyBatch& b) {
  if (!b.w.allFinite() || !b.a.allFinite()) throw FormatError("batch contains non-finite values");
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

void write_batch(const LevyBatch& batch, const std::string& path) {
  batch.validate();
  std::string buf(kMagic, 4);
  put<std::uint32_t>(buf, kBatchVersion);
  put<std::int32_t>(buf, batch.d);
  put<std::uint64_t>(buf, static_cast<std::uint64_t>(batch.size()));
  put<double>(buf, batch.dt);
  put<std::uint64_t>(buf, batch.seed);
  put<std::int32_t>(buf, batch.depth);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(batch.sampler.size()));
  buf.append(batch.sampler);
  // Eigen storage is column-major, so each column is already contiguous.
  buf.append(reinterpret_cast<const char*>(batch.w.data()),
             static_cast<std::size_t>(batch.w.size()) * sizeof(double));
  buf.append(reinterpret_cast<const char*>(batch.a.data()),
             static_cast<std::size_t>(batch.a.size()) * sizeof(double));
  write_text(path, buf);
}

LevyBatch read_batch(const std::string& path) {
  Reader r(slurp(path));
  if (r.remaining() < 4 || r.bytes(4) != std::string(kMagic, 4))
    throw FormatError("not a Levy batch file: " + path);
  const auto version = r.get<std::uint32_t>();
  if (version != kBatchVersion)
    throw FormatError("batch version " + std::to_string(version) + " is not supported");
  LevyBatch b;
  b.d = r.get<std::int32_t>();
  const auto n = r.get<std::uint64_t>();
  b.dt = r.get<double>();
  b.seed = r.get<std::uint64_t>();
  b.depth = r.get<std::int32_t>();
  const auto name_len = r.get<std::uint32_t>();
  if (b.d < 1 || b.d > 1024 || !(b.dt > 0.0) || !std::isfinite(b.dt) || name_len > kMaxName)
    throw FormatError("batch header is corrupt");
  b.sampler = r.bytes(name_len);
  const std::uint64_t per_row = static_cast<std::uint64_t>(b.d + area_dim(b.d));
  const std::uint64_t row_bytes = per_row * sizeof(double);
  if (n > r.remaining() / row_bytes) throw FormatError("batch file truncated");
  if (n * row_bytes != r.remaining()) throw FormatError("batch file has trailing bytes");
  b.w.resize(static_cast<Eigen::Index>(n), b.d);
  b.a.resize(static_cast<Eigen::Index>(n), area_dim(b.d));
  r.doubles(b.w.data(), static_cast<std::size_t>(b.w.size()));
  r.doubles(b.a.data(), static_cast<std::size_t>(b.a.size()));
  check_values(b);
  return b;
}

void write_batch_csv(const LevyBatch& batch, const std::string& path) {
  batch.validate();
  std::ostringstream os;
  os << "# format=levy-batch-csv\n# version=" << kBatchVersion << "\n# d=" << batch.d
     << "\n# n=" << batch.size() << "\n# dt=" << std::setprecision(17) << batch.dt
     << "\n# sampler=" << batch.sampler << "\n# seed=" << batch.seed << "\n# depth=" << batch.depth
     << '\n';
  for (int i = 0; i < batch.d; ++i) os << (i ? "," : "") << "w" << i;
  for (const auto& [i, j] : pair_list(batch.d)) os << ",a" << i << '_' << j;
  os << '\n';
  for (Eigen::Index r = 0; r < batch.size(); ++r) {
    for (int i = 0; i < batch.d; ++i) os << (i ? "," : "") << batch.w(r, i);
    for (Eigen::Index k = 0; k < batch.a.cols(); ++k) os << ',' << batch.a(r, k);
    os << '\n';
  }
  write_text(path, os.str());
}

LevyBatch read_batch_csv(const std::string& path) {
  std::istringstream in(slurp(path));
  LevyBatch b;
  b.d = 0;
  long long n = -1;
  std::string line;
  bool header_seen = false;
  std::vector<double> values;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(2, eq - 2), value = line.substr(eq + 1);
        if (key == "version" && std::stoul(value) != kBatchVersion)
          throw FormatError("batch version " + value + " is not supported");
        if (key == "d") b.d = std::stoi(value);
        if (key == "n") n = std::stoll(value);
        if (key == "dt") b.dt = std::stod(value);
        if (key == "sampler") b.sampler = value;
        if (key == "seed") b.seed = std::stoull(value);
        if (key == "depth") b.depth = std::stoi(value);
        continue;
      }
      if (!header_seen) {
        header_seen = true;
        continue;
      }
      std::istringstream row(line);
      std::string cell;
      while (std::getline(row, cell, ',')) {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw FormatError("malformed value in " + path);
      }
    }
  } catch (const std::logic_error&) {
    throw FormatError("malformed value in " + path);
  }
  if (b.d < 1 || n < 0 || !(b.dt > 0.0)) throw FormatError("batch CSV header is incomplete");
  const Eigen::Index width = b.d + area_dim(b.d);
  if (static_cast<long long>(values.size()) != n * width)
    throw FormatError("batch CSV row count or width does not match its header");
  b.w.resize(n, b.d);
  b.a.resize(n, area_dim(b.d));
  for (Eigen::Index r = 0; r < n; ++r) {
    for (int i = 0; i < b.d; ++i) b.w(r, i) = values[static_cast<std::size_t>(r * width + i)];
    for (Eigen::Index k = 0; k < b.a.cols(); ++k)
      b.a(r, k) = values[static_cast<std::size_t>(r * width + b.d + k)];
  }
  check_values(b);
  return b;
}

void save_batch(const LevyBatch& batch, const std::string& path) {
  if (ends_with(path, ".csv"))
    write_batch_csv(batch, path);
  else
    write_batch(batch, path);
}

LevyBatch load_batch(const std::string& path) {
  return ends_with(path, ".csv") ? read_batch_csv(path) : read_batch(path);
}

LevyBatch cached_reference(const std::string& dir, std::uint64_t seed, std::uint64_t stream_id,
                           Eigen::Index n, int d, int depth) {
  const randkit::RngStream stream(seed, stream_id);
  if (dir.empty()) return reference_batch(stream, n, d, 1.0, depth);
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path path = fs::path(dir) / ("reference_s" + std::to_string(seed) + "_id" +
                                         std::to_string(stream_id) + "_d" + std::to_string(d) +
                                         "_depth" + std::to_string(depth) + ".lvyb");
  if (fs::exists(path)) {
    try {
      LevyBatch cached = read_batch(path.string());
      if (cached.d == d && cached.depth == depth && cached.seed == seed && cached.size() >= n)
        return cached.size() == n ? cached : cached.head(n);
    } catch (const FormatError&) {
      // Regenerate over a damaged cache file.
    }
  }
  LevyBatch fresh = reference_batch(stream, n, d, 1.0, depth);
  fresh.depth = depth;
  const fs::path tmp = path.string() + ".tmp";
  write_batch(fresh, tmp.string());
  fs::rename(tmp, path);
  return fresh;
}

}  // namespace io
}  // namespace levy

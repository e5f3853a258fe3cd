#include "levy/pairnet.hpp"

#include "levy/parallel.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace levy::pairnet {

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

std::vector<int> GeneratorModel::widths() const {
  std::vector<int> out;
  if (layers.empty()) return out;
  out.push_back(static_cast<int>(layers.front().weight.cols()));
  for (const auto& layer : layers) out.push_back(static_cast<int>(layer.weight.rows()));
  return out;
}

Eigen::Index GeneratorModel::parameter_count() const {
  Eigen::Index n = 0;
  for (const auto& layer : layers) n += layer.weight.size() + layer.bias.size();
  return n;
}

bool GeneratorModel::all_finite() const {
  for (const auto& layer : layers)
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  return true;
}

namespace {

std::vector<int> full_widths(int noise_dim, const std::vector<int>& hidden) {
  std::vector<int> w{2 * (1 + noise_dim)};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(1);
  return w;
}

void check_arch(int d, int noise_dim, double slope) {
  if (d < 2) throw std::invalid_argument("generator dimension must be >= 2");
  if (noise_dim < 0) throw std::invalid_argument("noise_dim must be >= 0");
  if (!std::isfinite(slope)) throw std::invalid_argument("activation slope must be finite");
}

}  // namespace

GeneratorModel GeneratorModel::init(int d, int noise_dim, const std::vector<int>& hidden,
                                    double slope, randkit::RngStream& stream) {
  check_arch(d, noise_dim, slope);
  GeneratorModel m;
  m.d = d;
  m.noise_dim = noise_dim;
  m.slope = slope;
  const auto w = full_widths(noise_dim, hidden);
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    Layer layer;
    const double bound = 1.0 / std::sqrt(static_cast<double>(w[l]));
    layer.weight.resize(w[l + 1], w[l]);
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i)
      layer.weight(i) = bound * (2.0 * stream.uniform() - 1.0);
    layer.bias.resize(w[l + 1]);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i)
      layer.bias(i) = bound * (2.0 * stream.uniform() - 1.0);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

GeneratorModel GeneratorModel::zeros(int d, int noise_dim, const std::vector<int>& hidden,
                                     double slope) {
  check_arch(d, noise_dim, slope);
  GeneratorModel m;
  m.d = d;
  m.noise_dim = noise_dim;
  m.slope = slope;
  const auto w = full_widths(noise_dim, hidden);
  for (std::size_t l = 0; l + 1 < w.size(); ++l)
    m.layers.push_back({Eigen::MatrixXd::Zero(w[l + 1], w[l]), Eigen::VectorXd::Zero(w[l + 1])});
  return m;
}

Eigen::VectorXd mlp_forward(const GeneratorModel& model, const Eigen::MatrixXd& input,
                            ForwardCache* cache) {
  if (model.layers.empty()) throw std::invalid_argument("model has no layers");
  if (input.cols() != model.layers.front().weight.cols())
    throw std::invalid_argument("input width does not match model");
  if (cache) {
    cache->input = input;
    cache->pre.clear();
    cache->post.clear();
  }
  Eigen::MatrixXd act = input;
  const std::size_t n_layers = model.layers.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = model.layers[l];
    Eigen::MatrixXd z = act * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    if (l + 1 < n_layers) {
      act = z.unaryExpr([s = model.slope](double x) { return leaky_relu(x, s); });
    } else {
      act = z;
    }
    if (cache) {
      cache->pre.push_back(std::move(z));
      cache->post.push_back(act);
    }
  }
  return act.col(0);
}

std::vector<Layer> mlp_backward(const GeneratorModel& model, const ForwardCache& cache,
                                const Eigen::VectorXd& grad_output, Eigen::MatrixXd* grad_input) {
  const std::size_t n_layers = model.layers.size();
  if (cache.pre.size() != n_layers) throw std::invalid_argument("forward cache is incomplete");
  std::vector<Layer> grads(n_layers);
  Eigen::MatrixXd delta = grad_output;  // d loss / d pre-activation, n x width
  for (std::size_t l = n_layers; l-- > 0;) {
    const Eigen::MatrixXd& below = l == 0 ? cache.input : cache.post[l - 1];
    grads[l].weight = delta.transpose() * below;
    grads[l].bias = delta.colwise().sum().transpose();
    if (l == 0 && !grad_input) break;
    Eigen::MatrixXd upstream = delta * model.layers[l].weight;
    if (l == 0) {
      *grad_input = std::move(upstream);
      break;
    }
    const Eigen::MatrixXd& z = cache.pre[l - 1];
    delta = upstream.array() *
            z.unaryExpr([s = model.slope](double x) { return x > 0.0 ? 1.0 : s; }).array();
  }
  return grads;
}

Eigen::MatrixXd pair_inputs(const Eigen::MatrixXd& h, const Eigen::MatrixXd& z, int noise_dim) {
  const Eigen::Index n = h.rows();
  const int d = static_cast<int>(h.cols());
  if (z.rows() != n || z.cols() != static_cast<Eigen::Index>(d) * noise_dim)
    throw std::invalid_argument("noise shape does not match h and noise_dim");
  const int half = 1 + noise_dim;
  Eigen::MatrixXd x(n * area_dim(d), 2 * half);
  int p = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j, ++p) {
      auto rows = x.middleRows(p * n, n);
      rows.col(0) = h.col(i);
      rows.middleCols(1, noise_dim) = z.middleCols(i * noise_dim, noise_dim);
      rows.col(half) = h.col(j);
      rows.middleCols(half + 1, noise_dim) = z.middleCols(j * noise_dim, noise_dim);
    }
  return x;
}

Eigen::MatrixXd pairnet_b(const GeneratorModel& model, const Eigen::MatrixXd& h,
                          const Eigen::MatrixXd& z, ForwardCache* cache) {
  const Eigen::Index n = h.rows();
  const int d = static_cast<int>(h.cols());
  const Eigen::VectorXd flat = mlp_forward(model, pair_inputs(h, z, model.noise_dim), cache);
  return Eigen::Map<const Eigen::MatrixXd>(flat.data(), n, area_dim(d));
}

Eigen::MatrixXd bridge_flip(const Eigen::MatrixXd& w, const Eigen::MatrixXd& h,
                            const Eigen::MatrixXd& b, const Eigen::VectorXd& xi0,
                            const Eigen::MatrixXd& xi) {
  const int d = static_cast<int>(w.cols());
  if (h.rows() != w.rows() || h.cols() != d || b.rows() != w.rows() || b.cols() != area_dim(d) ||
      xi0.size() != w.rows() || xi.rows() != w.rows() || xi.cols() != d)
    throw std::invalid_argument("bridge_flip: inconsistent shapes");
  const Eigen::ArrayXXd fh = xi.array() * h.array();
  Eigen::MatrixXd out(w.rows(), area_dim(d));
  int p = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j, ++p)
      out.col(p) = xi0.array() * (fh.col(i) * w.col(j).array() - w.col(i).array() * fh.col(j) +
                                  xi.col(i).array() * xi.col(j).array() * b.col(p).array());
  return out;
}

GeneratorDraw draw_inputs(randkit::RngStream& stream, Eigen::Index n, int d, int noise_dim,
                          double h_variance) {
  GeneratorDraw g;
  g.h.resize(n, d);
  g.z.resize(n, static_cast<Eigen::Index>(d) * noise_dim);
  g.xi0.resize(n);
  g.xi.resize(n, d);
  randkit::fill_gauss(stream, g.h, h_variance);
  if (g.z.size() > 0) randkit::fill_gauss(stream, g.z, 1.0);
  randkit::fill_rademacher(stream, g.xi0);
  randkit::fill_rademacher(stream, g.xi);
  return g;
}

Eigen::MatrixXd generate_from(const GeneratorModel& model, const Eigen::MatrixXd& w_unit,
                              const GeneratorDraw& draw, bool flip, ForwardCache* cache) {
  const Eigen::MatrixXd b = pairnet_b(model, draw.h, draw.z, cache);
  if (flip) return bridge_flip(w_unit, draw.h, b, draw.xi0, draw.xi);
  const Eigen::Index n = w_unit.rows();
  return bridge_flip(w_unit, draw.h, b, Eigen::VectorXd::Ones(n),
                     Eigen::MatrixXd::Ones(n, w_unit.cols()));
}

LevyBatch generate(const GeneratorModel& model, const randkit::RngStream& stream,
                   const Eigen::MatrixXd& w, double dt, const GenerateOptions& opts) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (model.layers.empty()) throw std::invalid_argument("generator model not loaded");
  const int d = static_cast<int>(w.cols());
  if (d < 2) throw std::invalid_argument("pair-net generation needs d >= 2");
  LevyBatch out;
  out.d = d;
  out.dt = dt;
  out.w = w;
  out.a.resize(w.rows(), area_dim(d));
  out.sampler = "pairnet";
  out.seed = stream.seed();
  const double root_dt = std::sqrt(dt);
  parallel_blocks(w.rows(), opts.block, [&](std::int64_t block, std::int64_t begin,
                                            std::int64_t end) {
    auto s = stream.substream(static_cast<std::uint64_t>(block));
    const Eigen::Index rows = end - begin;
    const GeneratorDraw draw = draw_inputs(s, rows, d, model.noise_dim, opts.h_variance);
    const Eigen::MatrixXd w_unit = w.middleRows(begin, rows) / root_dt;
    out.a.middleRows(begin, rows) = dt * generate_from(model, w_unit, draw, opts.flip);
  });
  return out;
}

Eigen::MatrixXd sign_exhaustive_areas(const Eigen::MatrixXd& w, const Eigen::MatrixXd& h,
                                      const Eigen::MatrixXd& b) {
  const Eigen::Index n = w.rows();
  const int d = static_cast<int>(w.cols());
  const Eigen::Index patterns = Eigen::Index{1} << (d + 1);
  Eigen::MatrixXd rw(n * patterns, d), rh(n * patterns, d), rb(n * patterns, area_dim(d));
  Eigen::VectorXd xi0(n * patterns);
  Eigen::MatrixXd xi(n * patterns, d);
  for (Eigen::Index s = 0; s < n; ++s)
    for (Eigen::Index m = 0; m < patterns; ++m) {
      const Eigen::Index r = s * patterns + m;
      rw.row(r) = w.row(s);
      rh.row(r) = h.row(s);
      rb.row(r) = b.row(s);
      xi0(r) = (m & 1) ? -1.0 : 1.0;
      for (int k = 0; k < d; ++k) xi(r, k) = ((m >> (k + 1)) & 1) ? -1.0 : 1.0;
    }
  return bridge_flip(rw, rh, rb, xi0, xi);
}

namespace {

constexpr char kMagic[4] = {'L', 'G', 'E', 'N'};

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
    if (pos_ + sizeof(T) > data_.size()) throw FormatError("checkpoint truncated");
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  void expect_magic(const char (&magic)[4]) {
    if (data_.size() < 4 || std::memcmp(data_.data(), magic, 4) != 0)
      throw FormatError("not a generator checkpoint");
    pos_ = 4;
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  std::string data_;
  std::size_t pos_ = 0;
};

}  // namespace

void save(const GeneratorModel& model, const std::string& path) {
  std::string buf(kMagic, 4);
  put<std::uint32_t>(buf, kCheckpointVersion);
  put<std::int32_t>(buf, model.d);
  put<std::int32_t>(buf, model.noise_dim);
  put<double>(buf, model.slope);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(model.layers.size()));
  for (const auto& layer : model.layers) {
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(layer.weight.rows()));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(layer.weight.cols()));
  }
  for (const auto& layer : model.layers) {
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) put<double>(buf, layer.weight(i, j));
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) put<double>(buf, layer.bias(i));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("failed writing " + path);
  std::ofstream mirror(path + ".json", std::ios::trunc);
  if (mirror) mirror << to_json(model) << '\n';
}

GeneratorModel load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  Reader r(std::string(std::istreambuf_iterator<char>(in), {}));
  r.expect_magic(kMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint version " + std::to_string(version) + " is not supported");
  GeneratorModel m;
  m.d = r.get<std::int32_t>();
  m.noise_dim = r.get<std::int32_t>();
  m.slope = r.get<double>();
  const auto n_layers = r.get<std::uint32_t>();
  if (m.d < 2 || m.noise_dim < 0 || n_layers == 0 || n_layers > 64)
    throw FormatError("checkpoint header is corrupt");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    if (rows == 0 || cols == 0 || rows > 4096 || cols > 4096)
      throw FormatError("checkpoint layer shape is corrupt");
    if (!shapes.empty() && shapes.back().first != cols)
      throw FormatError("checkpoint layer shapes do not chain");
    shapes.emplace_back(rows, cols);
  }
  if (shapes.front().second != static_cast<std::uint32_t>(m.input_width()) ||
      shapes.back().first != 1)
    throw FormatError("checkpoint input/output widths are inconsistent");
  for (const auto& [rows, cols] : shapes) {
    Layer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) layer.weight(i, j) = r.get<double>();
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = r.get<double>();
    m.layers.push_back(std::move(layer));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after checkpoint payload");
  if (!m.all_finite()) throw FormatError("checkpoint contains non-finite weights");
  return m;
}

std::string to_json(const GeneratorModel& model) {
  nlohmann::json j;
  j["format"] = "LGEN";
  j["version"] = kCheckpointVersion;
  j["d"] = model.d;
  j["noise_dim"] = model.noise_dim;
  j["slope"] = model.slope;
  j["widths"] = model.widths();
  auto& layers = j["layers"] = nlohmann::json::array();
  for (const auto& layer : model.layers) {
    nlohmann::json lj;
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      std::vector<double> row(layer.weight.cols());
      for (Eigen::Index k = 0; k < layer.weight.cols(); ++k) row[k] = layer.weight(i, k);
      rows.push_back(std::move(row));
    }
    lj["weight"] = rows;
    lj["bias"] = std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size());
    layers.push_back(std::move(lj));
  }
  return j.dump(1);
}

}  // namespace levy::pairnet

#include "twolip/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace twolip {

namespace {

constexpr std::uint32_t kFormatVersion = 1;

void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64(out, bits);
}

void put_string(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }

  std::uint32_t u32() {
    const char* p = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(p[i])) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    const char* p = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(p[i])) << (8 * i);
    return v;
  }

  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  std::string str() {
    std::uint32_t len = u32();
    return std::string(take(len), len);
  }

  void expect_magic(const char* magic) {
    if (std::string(take(8), 8) != magic)
      throw std::runtime_error("file format: bad magic, expected " +
                               std::string(magic));
  }

  bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  const char* take(std::size_t count) {
    if (pos_ + count > bytes_.size())
      throw std::runtime_error("file format: truncated input");
    const char* p = bytes_.data() + pos_;
    pos_ += count;
    return p;
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

void check_version(std::uint32_t version) {
  if (version != kFormatVersion)
    throw std::runtime_error("file format: unsupported version " +
                             std::to_string(version));
}

std::string read_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << file.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw std::runtime_error("write to " + path + " failed");
}

}  // namespace

std::string dataset_to_bytes(const GenericDataset& ds) {
  std::string out;
  out.append("TWOLIPDS");
  put_u32(out, kFormatVersion);
  put_string(out, kGeneratorTag);
  put_u64(out, static_cast<std::uint64_t>(ds.n()));
  put_u64(out, static_cast<std::uint64_t>(ds.d()));
  put_u8(out, ds.config.model == DataModel::Sphere ? 0 : 1);
  put_u64(out, ds.config.seed);
  put_u8(out, ds.config.balanced ? 1 : 0);
  for (int i = 0; i < ds.n(); ++i)
    for (int j = 0; j < ds.d(); ++j) put_f64(out, ds.points(i, j));
  for (int i = 0; i < ds.n(); ++i)
    put_u8(out, ds.labels[i] > 0 ? 1 : 0);
  return out;
}

GenericDataset dataset_from_bytes(const std::string& bytes) {
  Reader r(bytes);
  r.expect_magic("TWOLIPDS");
  check_version(r.u32());
  std::string tag = r.str();
  if (tag != kGeneratorTag)
    throw std::runtime_error("dataset file uses generator '" + tag +
                             "', this build provides '" + kGeneratorTag + "'");
  GenericDataset ds;
  ds.config.n = static_cast<int>(r.u64());
  ds.config.d = static_cast<int>(r.u64());
  ds.config.model = r.u8() == 0 ? DataModel::Sphere : DataModel::Gaussian;
  ds.config.seed = r.u64();
  ds.config.balanced = r.u8() != 0;
  ds.config.validate();
  ds.points.resize(ds.config.n, ds.config.d);
  for (int i = 0; i < ds.config.n; ++i)
    for (int j = 0; j < ds.config.d; ++j) ds.points(i, j) = r.f64();
  ds.labels.resize(ds.config.n);
  for (int i = 0; i < ds.config.n; ++i) ds.labels[i] = r.u8() ? 1.0 : -1.0;
  if (!r.exhausted()) throw std::runtime_error("dataset file has trailing bytes");
  return ds;
}

void save_dataset(const GenericDataset& ds, const std::string& path) {
  write_file(path, dataset_to_bytes(ds));
}

GenericDataset load_dataset(const std::string& path) {
  return dataset_from_bytes(read_file(path));
}

std::string network_to_bytes(const TwoLayerNet& net) {
  net.validate();
  std::string out;
  out.append("TWOLIPNT");
  put_u32(out, kFormatVersion);
  switch (net.activation.kind) {
    case Activation::Kind::ReLU:
      put_u8(out, 0);
      break;
    case Activation::Kind::Power:
      put_u8(out, 1);
      put_u32(out, static_cast<std::uint32_t>(net.activation.power));
      break;
    case Activation::Kind::Poly:
      put_u8(out, 2);
      put_u64(out, net.activation.coeffs.size());
      for (double c : net.activation.coeffs) put_f64(out, c);
      break;
  }
  put_u64(out, static_cast<std::uint64_t>(net.neuron_count()));
  put_u64(out, static_cast<std::uint64_t>(net.input_dim()));
  for (int l = 0; l < net.neuron_count(); ++l) put_f64(out, net.a[l]);
  for (int l = 0; l < net.neuron_count(); ++l)
    for (int j = 0; j < net.input_dim(); ++j) put_f64(out, net.w(l, j));
  for (int l = 0; l < net.neuron_count(); ++l) put_f64(out, net.b[l]);
  return out;
}

TwoLayerNet network_from_bytes(const std::string& bytes) {
  Reader r(bytes);
  r.expect_magic("TWOLIPNT");
  check_version(r.u32());
  TwoLayerNet net;
  switch (r.u8()) {
    case 0:
      net.activation = Activation::relu();
      break;
    case 1:
      net.activation = Activation::power_fn(static_cast<int>(r.u32()));
      break;
    case 2: {
      std::uint64_t len = r.u64();
      std::vector<double> coeffs(len);
      for (auto& c : coeffs) c = r.f64();
      net.activation = Activation::poly(std::move(coeffs));
      break;
    }
    default:
      throw std::runtime_error("network file: unknown activation kind");
  }
  int k = static_cast<int>(r.u64());
  int d = static_cast<int>(r.u64());
  net.a.resize(k);
  net.w.resize(k, d);
  net.b.resize(k);
  for (int l = 0; l < k; ++l) net.a[l] = r.f64();
  for (int l = 0; l < k; ++l)
    for (int j = 0; j < d; ++j) net.w(l, j) = r.f64();
  for (int l = 0; l < k; ++l) net.b[l] = r.f64();
  if (!r.exhausted()) throw std::runtime_error("network file has trailing bytes");
  net.validate();
  return net;
}

void save_network(const TwoLayerNet& net, const std::string& path) {
  write_file(path, network_to_bytes(net));
}

TwoLayerNet load_network(const std::string& path) {
  return network_from_bytes(read_file(path));
}

std::string tensor_to_bytes(const RankOneSum& t) {
  std::string out;
  out.append("TWOLIPTN");
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(t.order()));
  put_u64(out, static_cast<std::uint64_t>(t.dim()));
  put_u64(out, t.term_count());
  for (const auto& term : t.terms()) {
    put_f64(out, term.coef);
    for (int j = 0; j < t.dim(); ++j) put_f64(out, term.vec[j]);
  }
  return out;
}

RankOneSum tensor_from_bytes(const std::string& bytes) {
  Reader r(bytes);
  r.expect_magic("TWOLIPTN");
  check_version(r.u32());
  int order = static_cast<int>(r.u32());
  int dim = static_cast<int>(r.u64());
  std::uint64_t terms = r.u64();
  RankOneSum t(order, dim);
  Eigen::VectorXd v(dim);
  for (std::uint64_t i = 0; i < terms; ++i) {
    double coef = r.f64();
    for (int j = 0; j < dim; ++j) v[j] = r.f64();
    t.add_term(coef, v);
  }
  if (!r.exhausted()) throw std::runtime_error("tensor file has trailing bytes");
  return t;
}

void save_tensor(const RankOneSum& t, const std::string& path) {
  write_file(path, tensor_to_bytes(t));
}

RankOneSum load_tensor(const std::string& path) {
  return tensor_from_bytes(read_file(path));
}

}  // namespace twolip

#include "lrt/serialization.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lrt {

namespace {

void put_u8(std::ostream& out, std::uint8_t v) {
  out.put(static_cast<char>(v));
}

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) put_u8(out, static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_i32(std::ostream& out, std::int32_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) put_u8(out, static_cast<std::uint8_t>(bits >> (8 * i)));
}

void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint8_t get_u8(std::istream& in) {
  const int c = in.get();
  if (c == EOF) throw std::runtime_error("container: truncated file");
  return static_cast<std::uint8_t>(c);
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(get_u8(in)) << (8 * i);
  return v;
}

std::int32_t get_i32(std::istream& in) {
  return static_cast<std::int32_t>(get_u32(in));
}

double get_f64(std::istream& in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(get_u8(in)) << (8 * i);
  return std::bit_cast<double>(v);
}

std::string get_str(std::istream& in) {
  const std::uint32_t len = get_u32(in);
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (in.gcount() != static_cast<std::streamsize>(len)) {
    throw std::runtime_error("container: truncated string");
  }
  return s;
}

void put_matrix(std::ostream& out, const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) put_f64(out, m(i, j));
  }
}

Matrix get_matrix(std::istream& in, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = get_f64(in);
  }
  return m;
}

void expect_magic(std::istream& in, const char* magic, const char* what) {
  char buf[4];
  in.read(buf, 4);
  if (in.gcount() != 4 || std::string(buf, 4) != magic) {
    throw std::runtime_error(std::string("container: not a ") + what +
                             " file (bad magic)");
  }
}

std::string read_magic(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + file.string() + "'");
  char buf[4] = {0, 0, 0, 0};
  in.read(buf, 4);
  return std::string(buf, static_cast<size_t>(in.gcount()));
}

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + file.string() + "'");
  return out;
}

std::ifstream open_in(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + file.string() + "'");
  return in;
}

}  // namespace

void write_transform(const Transform& t, std::ostream& out) {
  if (t.matrix.rows() != t.matrix.cols()) {
    throw std::invalid_argument("write_transform: matrix must be square");
  }
  out.write("LRT1", 4);
  put_u32(out, static_cast<std::uint32_t>(t.matrix.rows()));
  put_u8(out, t.kind == TransformKind::Global ? 0 : 1);
  put_i32(out, t.class_index);
  put_matrix(out, t.matrix);
}

Transform read_transform(std::istream& in) {
  expect_magic(in, "LRT1", "transform");
  const Index d = static_cast<Index>(get_u32(in));
  const std::uint8_t kind = get_u8(in);
  if (kind > 1) throw std::runtime_error("container: bad transform kind");
  Transform t;
  t.kind = kind == 0 ? TransformKind::Global : TransformKind::PerClass;
  t.class_index = get_i32(in);
  t.matrix = get_matrix(in, d, d);
  return t;
}

void save_transform(const Transform& t, const std::filesystem::path& file) {
  auto out = open_out(file);
  write_transform(t, out);
}

Transform load_transform(const std::filesystem::path& file) {
  auto in = open_in(file);
  return read_transform(in);
}

void save_dataset(const DataMatrix& data, const std::filesystem::path& file) {
  data.validate();
  auto out = open_out(file);
  out.write("LRD1", 4);
  put_u32(out, static_cast<std::uint32_t>(data.dim()));
  put_u32(out, static_cast<std::uint32_t>(data.count()));
  put_u32(out, static_cast<std::uint32_t>(data.class_names.size()));
  put_matrix(out, data.samples);
  for (int l : data.labels) put_i32(out, l);
  for (const auto& name : data.class_names) put_str(out, name);
  put_u8(out, data.conditions.empty() ? 0 : 1);
  for (const auto& c : data.conditions) put_str(out, c);
}

DataMatrix load_dataset(const std::filesystem::path& file) {
  auto in = open_in(file);
  expect_magic(in, "LRD1", "dataset");
  const Index d = static_cast<Index>(get_u32(in));
  const Index k = static_cast<Index>(get_u32(in));
  const std::uint32_t n_names = get_u32(in);
  DataMatrix data;
  data.samples = get_matrix(in, d, k);
  data.labels.reserve(static_cast<size_t>(k));
  for (Index i = 0; i < k; ++i) data.labels.push_back(get_i32(in));
  for (std::uint32_t i = 0; i < n_names; ++i) {
    data.class_names.push_back(get_str(in));
  }
  if (get_u8(in)) {
    for (Index i = 0; i < k; ++i) data.conditions.push_back(get_str(in));
  }
  data.validate();
  return data;
}

void save_model(const LowRankModel& model, const std::filesystem::path& file) {
  if (model.dictionaries.empty() || model.transforms.empty()) {
    throw std::invalid_argument("save_model: empty model");
  }
  auto out = open_out(file);
  out.write("LRM1", 4);
  put_u8(out, model.protocol == TransformKind::Global ? 0 : 1);
  const Index d = model.transforms[0].matrix.rows();
  put_u32(out, static_cast<std::uint32_t>(d));
  put_u32(out, static_cast<std::uint32_t>(model.dictionaries.size()));
  put_u8(out, model.rpca.beta ? 1 : 0);
  put_f64(out, model.rpca.beta.value_or(0.0));
  put_f64(out, model.rpca.tol);
  put_u32(out, static_cast<std::uint32_t>(model.rpca.max_iter));
  put_u32(out, static_cast<std::uint32_t>(model.transforms.size()));
  for (const auto& t : model.transforms) write_transform(t, out);
  for (const auto& dict : model.dictionaries) {
    put_u32(out, static_cast<std::uint32_t>(dict.cols()));
    put_matrix(out, dict);
  }
  put_u32(out, static_cast<std::uint32_t>(model.nonconverged_classes.size()));
  for (int c : model.nonconverged_classes) put_i32(out, c);
  put_u32(out, static_cast<std::uint32_t>(model.class_names.size()));
  for (const auto& name : model.class_names) put_str(out, name);
}

LowRankModel load_model(const std::filesystem::path& file) {
  auto in = open_in(file);
  expect_magic(in, "LRM1", "model");
  LowRankModel model;
  model.protocol = get_u8(in) == 0 ? TransformKind::Global
                                   : TransformKind::PerClass;
  const Index d = static_cast<Index>(get_u32(in));
  const std::uint32_t n = get_u32(in);
  const bool has_beta = get_u8(in) != 0;
  const double beta = get_f64(in);
  if (has_beta) model.rpca.beta = beta;
  model.rpca.tol = get_f64(in);
  model.rpca.max_iter = static_cast<int>(get_u32(in));
  const std::uint32_t n_transforms = get_u32(in);
  for (std::uint32_t i = 0; i < n_transforms; ++i) {
    model.transforms.push_back(read_transform(in));
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    const Index cols = static_cast<Index>(get_u32(in));
    model.dictionaries.push_back(get_matrix(in, d, cols));
  }
  const std::uint32_t n_bad = get_u32(in);
  for (std::uint32_t i = 0; i < n_bad; ++i) {
    model.nonconverged_classes.push_back(get_i32(in));
  }
  const std::uint32_t n_names = get_u32(in);
  for (std::uint32_t i = 0; i < n_names; ++i) {
    model.class_names.push_back(get_str(in));
  }
  return model;
}

void save_trace(const LearnTrace& trace, const std::filesystem::path& file) {
  std::ostringstream os;
  os.precision(17);
  for (double v : trace.objective_values) os << v << '\n';
  atomic_write_file(file, os.str());
}

std::string describe_container(const std::filesystem::path& file) {
  const std::string magic = read_magic(file);
  std::ostringstream os;
  if (magic == "LRT1") {
    const Transform t = load_transform(file);
    os << "transform container (LRT1)\n"
       << "  dimension: " << t.matrix.rows() << " x " << t.matrix.cols()
       << "\n  kind: "
       << (t.kind == TransformKind::Global ? "global" : "per-class");
    if (t.kind == TransformKind::PerClass) {
      os << "\n  class index: " << t.class_index;
    }
    os << "\n  spectral norm: " << spectral_norm(t.matrix) << "\n";
  } else if (magic == "LRD1") {
    const DataMatrix data = load_dataset(file);
    os << "dataset container (LRD1)\n"
       << "  dimension: " << data.dim() << "\n  samples: " << data.count()
       << "\n  classes: " << data.num_classes() << "\n  condition tags: "
       << (data.conditions.empty() ? "no" : "yes")
       << "\n  fingerprint: " << data.fingerprint() << "\n";
  } else if (magic == "LRM1") {
    const LowRankModel model = load_model(file);
    os << "low-rank model container (LRM1)\n"
       << "  protocol: "
       << (model.protocol == TransformKind::Global ? "global" : "per-class")
       << "\n  classes: " << model.num_classes() << "\n  dictionary columns:";
    for (const auto& dict : model.dictionaries) os << ' ' << dict.cols();
    os << "\n  rpca: beta="
       << (model.rpca.beta ? std::to_string(*model.rpca.beta) : "auto")
       << " tol=" << model.rpca.tol << " max_iter=" << model.rpca.max_iter
       << "\n  converged: " << (model.all_converged() ? "all classes" : "NOT all classes")
       << "\n";
  } else {
    throw std::runtime_error("'" + file.string() +
                             "' is not an LRT container file");
  }
  return os.str();
}

void atomic_write_file(const std::filesystem::path& file,
                       const std::string& content) {
  namespace fs = std::filesystem;
  fs::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, file);
}

}  // namespace lrt

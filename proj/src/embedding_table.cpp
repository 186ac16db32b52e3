#include "embkit/embedding_table.hpp"

#include "embkit/errors.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace embkit {

EmbeddingTable::EmbeddingTable(std::vector<std::string> ids,
                               std::vector<double> row_major, std::size_t dim,
                               std::optional<double> norm_bound)
    : ids_(std::move(ids)),
      data_(std::move(row_major)),
      dim_(dim),
      norm_bound_(norm_bound) {
  if (dim_ == 0) throw ValidationError("embedding table: dim must be >= 1");
  if (data_.size() != ids_.size() * dim_)
    throw ValidationError("embedding table: data size != count * dim");
  for (double v : data_) {
    if (!std::isfinite(v))
      throw ValidationError("embedding table: non-finite entry");
  }
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second)
      throw ValidationError("embedding table: duplicate id '" + ids_[i] + "'");
  }
  if (norm_bound_) {
    const double bound = *norm_bound_;
    if (!(bound > 0.0))
      throw ValidationError("embedding table: norm bound must be positive");
    const double slack = bound * (1.0 + 1e-12);
    for (std::size_t i = 0; i < size(); ++i) {
      if (row_norm(i) > slack)
        throw ValidationError("embedding table: row '" + ids_[i] +
                              "' violates norm bound");
    }
  }
}

std::span<const double> EmbeddingTable::row(std::size_t i) const {
  if (i >= size()) throw LookupError("embedding table: row index out of range");
  return {data_.data() + i * dim_, dim_};
}

double EmbeddingTable::row_norm(std::size_t i) const {
  double acc = 0.0;
  for (double v : row(i)) acc += v * v;
  return std::sqrt(acc);
}

const std::string& EmbeddingTable::id(std::size_t i) const {
  if (i >= size()) throw LookupError("embedding table: row index out of range");
  return ids_[i];
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingTable::index_of(std::string_view id) const {
  auto idx = find(id);
  if (!idx) throw LookupError("embedding table: unknown id '" + std::string(id) + "'");
  return *idx;
}

// ---------------------------------------------------------------------------
// Text container
// ---------------------------------------------------------------------------

void save_embeddings_text(const EmbeddingTable& table,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.id(i) << '\t';
    const auto row = table.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ' ';
      out << row[j];
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

EmbeddingTable load_embeddings_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);

  std::vector<std::string> ids;
  std::vector<double> data;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": missing id/vector tab separator");
    ids.push_back(line.substr(0, tab));
    std::istringstream values(line.substr(tab + 1));
    std::size_t row_dim = 0;
    double v;
    while (values >> v) {
      data.push_back(v);
      ++row_dim;
    }
    if (!values.eof())
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": malformed float");
    if (dim == 0)
      dim = row_dim;
    else if (row_dim != dim)
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": inconsistent dimension");
    if (row_dim == 0)
      throw ParseError(path + ":" + std::to_string(line_no) + ": empty vector");
  }
  if (ids.empty()) throw ParseError(path + ": no embedding rows");
  return EmbeddingTable(std::move(ids), std::move(data), dim);
}

// ---------------------------------------------------------------------------
// Binary container
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', 'K'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void put_u16(std::ostream& out, std::uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(b, 2);
}

void put_f32(std::ostream& out, float v) {
  static_assert(sizeof(float) == 4);
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw ParseError(path + ": truncated binary container");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t get_u16(std::istream& in, const std::string& path) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  if (!in) throw ParseError(path + ": truncated binary container");
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

float get_f32(std::istream& in, const std::string& path) {
  const std::uint32_t bits = get_u32(in, path);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

} // namespace

void save_embeddings_binary(const EmbeddingTable& table,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kMagic, 4);
  out.put(static_cast<char>(kVersion));
  put_u32(out, static_cast<std::uint32_t>(table.dim()));
  put_u32(out, static_cast<std::uint32_t>(table.size()));
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::string& id = table.id(i);
    if (id.size() > 0xffff)
      throw ValidationError("binary container: id longer than 65535 bytes");
    put_u16(out, static_cast<std::uint16_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (double v : table.row(i)) put_f32(out, static_cast<float>(v));
  }
  if (!out) throw IoError("write failed: " + path);
}

EmbeddingTable load_embeddings_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw ParseError(path + ": not an EMBK container");
  const int version = in.get();
  if (version != kVersion)
    throw ParseError(path + ": unsupported container version " +
                     std::to_string(version));
  const std::uint32_t dim = get_u32(in, path);
  const std::uint32_t count = get_u32(in, path);
  if (dim == 0) throw ParseError(path + ": zero dimension");

  std::vector<std::string> ids;
  ids.reserve(count);
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(count) * dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t len = get_u16(in, path);
    std::string id(len, '\0');
    in.read(id.data(), len);
    if (!in) throw ParseError(path + ": truncated binary container");
    ids.push_back(std::move(id));
    for (std::uint32_t j = 0; j < dim; ++j)
      data.push_back(static_cast<double>(get_f32(in, path)));
  }
  return EmbeddingTable(std::move(ids), std::move(data), dim);
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  in.close();
  if (std::memcmp(magic, kMagic, 4) == 0) return load_embeddings_binary(path);
  return load_embeddings_text(path);
}

EmbeddingTable subset_by_ids(const EmbeddingTable& table,
                             const std::vector<std::string>& ids) {
  std::vector<double> data;
  data.reserve(ids.size() * table.dim());
  for (const std::string& id : ids) {
    const auto row = table.row(table.index_of(id));
    data.insert(data.end(), row.begin(), row.end());
  }
  return EmbeddingTable(ids, std::move(data), table.dim(), table.norm_bound());
}

} // namespace embkit

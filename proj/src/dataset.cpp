#include "embkit/dataset.hpp"

#include "embkit/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace embkit {

std::span<const std::uint32_t> InteractionDataset::train_items(
    std::size_t user) const {
  const auto& seq = sequences.at(user);
  return {seq.data(), seq.size() - 2};
}

std::uint32_t InteractionDataset::valid_item(std::size_t user) const {
  const auto& seq = sequences.at(user);
  return seq[seq.size() - 2];
}

std::uint32_t InteractionDataset::test_item(std::size_t user) const {
  return sequences.at(user).back();
}

namespace {

constexpr std::size_t kCoreThreshold = 5;

struct Row {
  std::string user;
  std::string item;
  std::int64_t timestamp;
  std::size_t file_order;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

std::int64_t parse_timestamp(const std::string& s, const std::string& path,
                             std::size_t line_no) {
  std::int64_t value = 0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError(path + ":" + std::to_string(line_no) +
                     ": bad timestamp '" + s + "'");
  return value;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
    --e;
  return s.substr(b, e - b);
}

std::vector<Row> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (line_no == 1 && stripped.rfind("user_id,", 0) == 0) continue; // header
    auto fields = split_csv_line(stripped);
    if (fields.size() < 3)
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected user_id,item_id,timestamp");
    Row row;
    row.user = trim(fields[0]);
    row.item = trim(fields[1]);
    if (row.user.empty() || row.item.empty())
      throw ParseError(path + ":" + std::to_string(line_no) + ": empty id");
    row.timestamp = parse_timestamp(trim(fields[2]), path, line_no);
    row.file_order = rows.size();
    rows.push_back(std::move(row));
  }
  return rows;
}

// Iterated removal of users/items below the interaction threshold, run to a
// fixed point.
void five_core_filter(std::vector<Row>& rows) {
  for (;;) {
    std::unordered_map<std::string, std::size_t> user_counts, item_counts;
    for (const Row& r : rows) {
      ++user_counts[r.user];
      ++item_counts[r.item];
    }
    const std::size_t before = rows.size();
    std::erase_if(rows, [&](const Row& r) {
      return user_counts[r.user] < kCoreThreshold ||
             item_counts[r.item] < kCoreThreshold;
    });
    if (rows.size() == before) return;
  }
}

InteractionDataset build_dataset(std::vector<Row> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.user != b.user) return a.user < b.user;
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.file_order < b.file_order;
  });

  InteractionDataset ds;
  std::unordered_map<std::string, std::uint32_t> item_index;
  std::vector<std::vector<std::uint32_t>> sequences;

  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].user == rows[i].user) ++j;
    if (j - i >= 3) {
      std::vector<std::uint32_t> seq;
      seq.reserve(j - i);
      for (std::size_t k = i; k < j; ++k) {
        auto [it, inserted] = item_index.emplace(
            rows[k].item, static_cast<std::uint32_t>(ds.item_ids.size()));
        if (inserted) ds.item_ids.push_back(rows[k].item);
        seq.push_back(it->second);
      }
      ds.user_ids.push_back(rows[i].user);
      sequences.push_back(std::move(seq));
    }
    i = j;
  }
  ds.sequences = std::move(sequences);

  ds.item_train_counts.assign(ds.item_ids.size(), 0);
  for (std::size_t u = 0; u < ds.num_users(); ++u)
    for (std::uint32_t item : ds.train_items(u)) ++ds.item_train_counts[item];
  return ds;
}

} // namespace

InteractionDataset load_interactions_csv(const std::string& path,
                                         const LoadOptions& options) {
  std::vector<Row> rows = read_rows(path);
  if (options.five_core) five_core_filter(rows);
  InteractionDataset ds = build_dataset(std::move(rows));
  if (ds.num_users() == 0)
    throw DegenerateError(path + ": dataset empty after filtering");
  return ds;
}

void save_interactions_csv(const InteractionDataset& dataset,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "user_id,item_id,timestamp\n";
  for (std::size_t u = 0; u < dataset.num_users(); ++u) {
    const auto& seq = dataset.sequences[u];
    for (std::size_t t = 0; t < seq.size(); ++t)
      out << dataset.user_ids[u] << ',' << dataset.item_ids[seq[t]] << ',' << t
          << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

InteractionDataset dataset_from_sequences(
    std::vector<std::string> user_ids, std::vector<std::string> item_ids,
    std::vector<std::vector<std::uint32_t>> sequences) {
  if (user_ids.size() != sequences.size())
    throw ValidationError("dataset: user/sequence count mismatch");
  for (const auto& seq : sequences) {
    if (seq.size() < 3)
      throw ValidationError("dataset: sequence shorter than 3");
    for (std::uint32_t item : seq)
      if (item >= item_ids.size())
        throw ValidationError("dataset: item index out of range");
  }
  InteractionDataset ds;
  ds.user_ids = std::move(user_ids);
  ds.item_ids = std::move(item_ids);
  ds.sequences = std::move(sequences);
  ds.item_train_counts.assign(ds.item_ids.size(), 0);
  for (std::size_t u = 0; u < ds.num_users(); ++u)
    for (std::uint32_t item : ds.train_items(u)) ++ds.item_train_counts[item];
  return ds;
}

RawInteractions load_raw_interactions_csv(const std::string& path) {
  std::vector<Row> rows = read_rows(path);
  RawInteractions raw;
  std::unordered_map<std::string, std::size_t> user_index;
  for (Row& r : rows) {
    auto [it, inserted] =
        user_index.emplace(r.user, raw.user_ids.size());
    if (inserted) {
      raw.user_ids.push_back(r.user);
      raw.rows.emplace_back();
    }
    raw.rows[it->second].emplace_back(std::move(r.item), r.timestamp);
  }
  return raw;
}

// ---------------------------------------------------------------------------
// Binary dataset cache
// ---------------------------------------------------------------------------

namespace {

constexpr char kDatasetMagic[4] = {'E', 'M', 'B', 'D'};

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw ParseError(path + ": truncated dataset cache");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_string(std::ostream& out, const std::string& s) {
  if (s.size() > 0xffff)
    throw ValidationError("dataset cache: id longer than 65535 bytes");
  char b[2] = {static_cast<char>(s.size() & 0xff),
               static_cast<char>((s.size() >> 8) & 0xff)};
  out.write(b, 2);
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in, const std::string& path) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  if (!in) throw ParseError(path + ": truncated dataset cache");
  const std::size_t len = static_cast<std::size_t>(b[0] | (b[1] << 8));
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw ParseError(path + ": truncated dataset cache");
  return s;
}

} // namespace

void save_dataset_binary(const InteractionDataset& dataset,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kDatasetMagic, 4);
  out.put(1);
  put_u32(out, static_cast<std::uint32_t>(dataset.num_items()));
  put_u32(out, static_cast<std::uint32_t>(dataset.num_users()));
  for (const auto& id : dataset.item_ids) put_string(out, id);
  for (std::size_t u = 0; u < dataset.num_users(); ++u) {
    put_string(out, dataset.user_ids[u]);
    put_u32(out, static_cast<std::uint32_t>(dataset.sequences[u].size()));
    for (std::uint32_t item : dataset.sequences[u]) put_u32(out, item);
  }
  if (!out) throw IoError("write failed: " + path);
}

InteractionDataset load_dataset_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kDatasetMagic, 4) != 0)
    throw ParseError(path + ": not an EMBD dataset cache");
  const int version = in.get();
  if (version != 1)
    throw ParseError(path + ": unsupported cache version " +
                     std::to_string(version));
  const std::uint32_t num_items = get_u32(in, path);
  const std::uint32_t num_users = get_u32(in, path);

  std::vector<std::string> item_ids;
  item_ids.reserve(num_items);
  for (std::uint32_t i = 0; i < num_items; ++i)
    item_ids.push_back(get_string(in, path));

  std::vector<std::string> user_ids;
  std::vector<std::vector<std::uint32_t>> sequences;
  user_ids.reserve(num_users);
  sequences.reserve(num_users);
  for (std::uint32_t u = 0; u < num_users; ++u) {
    user_ids.push_back(get_string(in, path));
    const std::uint32_t len = get_u32(in, path);
    std::vector<std::uint32_t> seq;
    seq.reserve(len);
    for (std::uint32_t t = 0; t < len; ++t) seq.push_back(get_u32(in, path));
    sequences.push_back(std::move(seq));
  }
  return dataset_from_sequences(std::move(user_ids), std::move(item_ids),
                                std::move(sequences));
}

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

LabelCatalog load_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  LabelCatalog catalog;
  std::unordered_map<std::string, std::uint32_t> class_index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (line_no == 1 && stripped == "item_id,class_id") continue;
    auto fields = split_csv_line(stripped);
    if (fields.size() != 2)
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected item_id,class_id");
    const std::string item = trim(fields[0]);
    const std::string cls = trim(fields[1]);
    if (item.empty() || cls.empty())
      throw ParseError(path + ":" + std::to_string(line_no) + ": empty field");

    auto [cit, new_class] = class_index.emplace(
        cls, static_cast<std::uint32_t>(catalog.class_names.size()));
    if (new_class) catalog.class_names.push_back(cls);
    const std::uint32_t class_id = cit->second;

    auto [iit, new_item] = catalog.by_id.emplace(item, class_id);
    if (!new_item) {
      if (iit->second != class_id)
        throw ConflictError(path + ":" + std::to_string(line_no) + ": item '" +
                            item + "' already labeled '" +
                            catalog.class_names[iit->second] + "'");
      continue; // idempotent re-listing
    }
    catalog.items.emplace_back(item, class_id);
  }
  if (catalog.items.empty()) throw ParseError(path + ": no labels");
  return catalog;
}

void save_labels_csv(const LabelCatalog& catalog, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "item_id,class_id\n";
  for (const auto& [item, cls] : catalog.items)
    out << item << ',' << catalog.class_names[cls] << '\n';
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::pair<std::size_t, std::uint32_t>> bind_labels(
    const LabelCatalog& catalog, const EmbeddingTable& table) {
  std::vector<std::pair<std::size_t, std::uint32_t>> bound;
  bound.reserve(catalog.items.size());
  for (const auto& [item, cls] : catalog.items)
    bound.emplace_back(table.index_of(item), cls);
  return bound;
}

LabelCatalog restrict_to_table(const LabelCatalog& catalog,
                               const EmbeddingTable& table) {
  LabelCatalog out;
  std::unordered_map<std::uint32_t, std::uint32_t> remap;
  for (const auto& [item, cls] : catalog.items) {
    if (!table.find(item)) continue;
    auto [it, inserted] = remap.emplace(
        cls, static_cast<std::uint32_t>(out.class_names.size()));
    if (inserted) out.class_names.push_back(catalog.class_names[cls]);
    out.items.emplace_back(item, it->second);
    out.by_id.emplace(item, it->second);
  }
  if (out.items.empty())
    throw DegenerateError("labels: no labeled item has an embedding");
  return out;
}

} // namespace embkit

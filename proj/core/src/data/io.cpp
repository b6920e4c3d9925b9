#include "rad/data/io.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include "../binary_io.hpp"
#include "rad/error.hpp"

namespace rad::data {

namespace {

constexpr std::uint8_t kDatasetVersion = 1;

// Splits one CSV record. Supports double-quoted fields with "" escapes;
// records never span lines.
std::vector<std::string> split_record(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) throw ParseError(line_no, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string quote_if_needed(const std::string& v) {
  if (v.find_first_of(",\"") == std::string::npos) return v;
  std::string out = "\"";
  for (char ch : v) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

struct Layout {
  std::vector<std::size_t> feature_pos;
  std::size_t label_pos = 0;
  std::size_t timestamp_pos = 0;
  std::size_t width = 0;
};

Layout resolve_header(const std::vector<std::string>& header,
                      const std::vector<std::string>& features, const std::string& label,
                      const std::string& timestamp) {
  auto locate = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw SchemaError("CSV header is missing declared column '" + name + "'");
  };
  Layout layout;
  for (const auto& f : features) layout.feature_pos.push_back(locate(f));
  layout.label_pos = locate(label);
  layout.timestamp_pos = locate(timestamp);
  layout.width = header.size();
  return layout;
}

std::uint8_t parse_label(const std::string& v, std::size_t line_no) {
  if (v == "0") return 0;
  if (v == "1") return 1;
  throw ParseError(line_no, "label '" + v + "' is not 0 or 1");
}

std::int64_t parse_timestamp(const std::string& v, std::size_t line_no) {
  std::int64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw ParseError(line_no, "timestamp '" + v + "' is not an integer");
  }
  return out;
}

// Shared reader: `encode(column, text)` produces the value index.
template <typename Encode>
std::vector<Sample> read_rows(std::istream& in, const Layout& layout, std::size_t first_line,
                              Encode&& encode) {
  std::vector<Sample> rows;
  std::string line;
  std::size_t line_no = first_line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_record(line, line_no);
    if (fields.size() != layout.width) {
      throw ParseError(line_no, "expected " + std::to_string(layout.width) + " fields, got " +
                                    std::to_string(fields.size()));
    }
    Sample s;
    s.row_id = static_cast<RowId>(rows.size());
    s.features.reserve(layout.feature_pos.size());
    for (std::size_t c = 0; c < layout.feature_pos.size(); ++c) {
      s.features.push_back(encode(c, fields[layout.feature_pos[c]]));
    }
    s.label = parse_label(fields[layout.label_pos], line_no);
    s.timestamp = parse_timestamp(fields[layout.timestamp_pos], line_no);
    rows.push_back(std::move(s));
  }
  return rows;
}

std::vector<std::string> read_header(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) {
    throw EmptyDatasetError("'" + path.string() + "' is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // Tolerate a UTF-8 byte-order mark.
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  if (line.empty()) throw EmptyDatasetError("'" + path.string() + "' has an empty header");
  return split_record(line, 1);
}

std::ifstream open_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const ColumnRoles& roles) {
  auto in = open_text(path);
  const auto header = read_header(in, path);
  auto schema = std::make_shared<Schema>(roles.features, roles.label, roles.timestamp);
  const auto layout = resolve_header(header, roles.features, roles.label, roles.timestamp);
  auto rows = read_rows(in, layout, 1, [&](std::size_t c, const std::string& text) {
    return schema->intern(c, text);
  });
  // Values were interned as they arrived, so indices are final and in range.
  return Dataset(std::move(schema), std::move(rows));
}

Dataset load_csv(const std::filesystem::path& path, std::shared_ptr<const Schema> schema) {
  auto in = open_text(path);
  const auto header = read_header(in, path);
  std::vector<std::string> features;
  for (std::size_t c = 0; c < schema->num_features(); ++c) {
    features.push_back(schema->feature_name(c));
  }
  const auto layout =
      resolve_header(header, features, schema->label_column(), schema->timestamp_column());
  auto rows = read_rows(in, layout, 1, [&](std::size_t c, const std::string& text) {
    return schema->encode(c, text);
  });
  return Dataset(std::move(schema), std::move(rows));
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  const auto& schema = dataset.schema();
  const auto f = schema.num_features();
  for (std::size_t c = 0; c < f; ++c) out << quote_if_needed(schema.feature_name(c)) << ',';
  out << quote_if_needed(schema.label_column()) << ',' << quote_if_needed(schema.timestamp_column())
      << '\n';
  for (const auto& s : dataset) {
    for (std::size_t c = 0; c < f; ++c) {
      out << quote_if_needed(schema.decode(c, s.features[c])) << ',';
    }
    out << static_cast<int>(s.label) << ',' << s.timestamp << '\n';
  }
  if (!out) throw FormatError("write to '" + path.string() + "' failed");
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  io::BinaryWriter w(path);
  w.magic("RADD", kDatasetVersion);
  const auto& schema = dataset.schema();
  const auto f = schema.num_features();
  w.string(schema.label_column());
  w.string(schema.timestamp_column());
  w.pod(static_cast<std::uint32_t>(f));
  for (std::size_t c = 0; c < f; ++c) {
    w.string(schema.feature_name(c));
    const auto v = schema.vocab_size(c);
    w.pod(v);
    for (ValueIndex i = 0; i < v; ++i) w.string(schema.decode(c, i));
  }
  w.pod(static_cast<std::uint64_t>(dataset.size()));
  for (const auto& s : dataset) {
    w.pod(s.row_id);
    w.pod(s.label);
    w.pod(s.timestamp);
    w.array(std::span<const ValueIndex>(s.features));
  }
  w.finish();
}

Dataset load_dataset(const std::filesystem::path& path) {
  io::BinaryReader r(path);
  if (const auto version = r.magic("RADD"); version != kDatasetVersion) {
    throw FormatError("unsupported RADD version " + std::to_string(version));
  }
  auto label = r.string();
  auto timestamp = r.string();
  const auto f = r.pod<std::uint32_t>();
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> vocabs(f);
  for (std::uint32_t c = 0; c < f; ++c) {
    names.push_back(r.string());
    const auto v = r.pod<std::uint32_t>();
    for (std::uint32_t i = 0; i < v; ++i) vocabs[c].push_back(r.string());
  }
  auto schema = std::make_shared<Schema>(names, label, timestamp);
  for (std::uint32_t c = 0; c < f; ++c) {
    for (const auto& value : vocabs[c]) schema->intern(c, value);
    if (schema->vocab_size(c) != vocabs[c].size()) {
      throw FormatError("duplicate vocabulary entry in column '" + names[c] + "'");
    }
  }
  const auto n = r.pod<std::uint64_t>();
  std::vector<Sample> rows;
  rows.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Sample s;
    s.row_id = r.pod<RowId>();
    s.label = r.pod<std::uint8_t>();
    s.timestamp = r.pod<std::int64_t>();
    s.features = r.array<ValueIndex>(f);
    rows.push_back(std::move(s));
  }
  return Dataset(std::move(schema), std::move(rows));
}

Dataset load_any(const std::filesystem::path& path, std::shared_ptr<const Schema> schema) {
  if (path.extension() == ".csv") return load_csv(path, std::move(schema));
  return load_dataset(path);
}

}  // namespace rad::data

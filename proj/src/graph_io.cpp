#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>

#include "wctg/errors.hpp"
#include "wctg/het_graph.hpp"

namespace wctg {

namespace {

constexpr std::string_view kMagic = "WCTG v";
constexpr int kVersion = 1;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  auto [end, ec] = std::to_chars(buf, buf + 16, v, 16);
  std::string s(buf, end);
  return std::string(16 - s.size(), '0') + s;
}

std::string format_weight(double w) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, w);
  return std::string(buf, end);
}

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
  throw GraphFormatError(GraphFormatError::Kind::malformed,
                         "graph file line " + std::to_string(line_no) + ": " + what);
}

std::size_t parse_index(std::string_view s, std::size_t line_no) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    malformed(line_no, "bad integer '" + std::string(s) + "'");
  return v;
}

double parse_weight(std::string_view s, std::size_t line_no) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    malformed(line_no, "bad weight '" + std::string(s) + "'");
  return v;
}

}  // namespace

void write_graph(const HetGraph& graph, std::ostream& out) {
  std::string body;
  body += std::string(kMagic) + std::to_string(kVersion) + "\n";
  body += "#nodes\n";
  for (std::size_t t = 0; t < kNodeTypes; ++t) {
    const auto type_name = std::string(to_string(static_cast<NodeType>(t)));
    for (std::size_t i = 0; i < graph.keys[t].size(); ++i)
      body += type_name + "\t" + std::to_string(i) + "\t" + graph.keys[t][i] + "\n";
  }
  body += "#classes\n";
  for (const auto& c : graph.class_names) body += c + "\n";
  body += "#labels\n";
  for (std::size_t d = 0; d < graph.labels.size(); ++d)
    body += std::to_string(d) + "\t" + std::string(to_string(graph.splits[d])) + "\t" +
            graph.class_names[graph.labels[d]] + "\n";
  body += "#edges\n";
  for (auto etype : kAllEdgeTypes) {
    const auto tag = std::string(to_string(etype));
    for (const auto& e : graph.edges_of(etype))
      body += tag + "\t" + std::to_string(e.src) + "\t" + std::to_string(e.dst) + "\t" +
              format_weight(e.weight) + "\n";
  }
  out << body << "#end\t" << hex64(fnv1a(body)) << "\n";
}

HetGraph read_graph(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (text.starts_with(kMagic)) {
    const auto eol = text.find_first_of("\r\n");
    const auto version = std::string_view(text).substr(kMagic.size(), eol == std::string::npos
                                                                          ? std::string::npos
                                                                          : eol - kMagic.size());
    if (version != std::to_string(kVersion))
      throw GraphFormatError(GraphFormatError::Kind::version,
                             "unsupported graph format version '" + std::string(version) +
                                 "' (expected " + std::to_string(kVersion) + ")");
  }

  // Locate the trailer before parsing so truncation is reported first.
  std::size_t trailer = std::string::npos;
  if (text.starts_with("#end")) {
    trailer = 0;
  } else {
    const auto pos = text.rfind("\n#end");
    if (pos != std::string::npos) trailer = pos + 1;
  }
  if (trailer == std::string::npos)
    throw GraphFormatError(GraphFormatError::Kind::truncated, "graph file is truncated (no #end)");

  const std::string_view body(text.data(), trailer);
  std::string_view end_line(text.data() + trailer, text.size() - trailer);
  while (!end_line.empty() && (end_line.back() == '\n' || end_line.back() == '\r'))
    end_line.remove_suffix(1);
  if (end_line.find('\n') != std::string_view::npos)
    throw GraphFormatError(GraphFormatError::Kind::malformed, "content after #end");
  const auto end_fields = fields_of(end_line);
  if (end_fields[0] != "#end" || end_fields.size() > 2)
    throw GraphFormatError(GraphFormatError::Kind::malformed, "bad #end line");
  if (end_fields.size() == 2 && end_fields[1] != hex64(fnv1a(body)))
    throw GraphFormatError(GraphFormatError::Kind::checksum,
                           "graph file checksum mismatch (expected " + std::string(end_fields[1]) +
                               ", computed " + hex64(fnv1a(body)) + ")");

  HetGraph g;
  std::vector<std::string> label_names;
  bool explicit_classes = false;
  enum class Section { header, nodes, classes, labels, edges } section = Section::header;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < body.size()) {
    auto nl = body.find('\n', start);
    if (nl == std::string_view::npos) nl = body.size();
    std::string_view line = body.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line_no == 1) {
      if (!line.starts_with(kMagic))
        throw GraphFormatError(GraphFormatError::Kind::malformed, "missing WCTG header");
      const auto version = line.substr(kMagic.size());
      if (version != std::to_string(kVersion))
        throw GraphFormatError(GraphFormatError::Kind::version,
                               "unsupported graph format version '" + std::string(version) +
                                   "' (expected " + std::to_string(kVersion) + ")");
      continue;
    }
    if (line.empty()) continue;
    if (line == "#nodes" && section == Section::header) {
      section = Section::nodes;
      continue;
    }
    if (line == "#classes" && section == Section::nodes) {
      section = Section::classes;
      explicit_classes = true;
      continue;
    }
    if (line == "#labels" && (section == Section::nodes || section == Section::classes)) {
      section = Section::labels;
      continue;
    }
    if (line == "#edges" && section == Section::labels) {
      section = Section::edges;
      continue;
    }
    if (line.front() == '#') malformed(line_no, "unexpected section '" + std::string(line) + "'");

    switch (section) {
      case Section::header: malformed(line_no, "content before #nodes");
      case Section::nodes: {
        const auto f = fields_of(line);
        if (f.size() != 3) malformed(line_no, "node line needs 3 fields");
        const auto type = parse_node_type(f[0]);
        if (!type) malformed(line_no, "unknown node type '" + std::string(f[0]) + "'");
        auto& reg = g.keys[static_cast<std::size_t>(*type)];
        if (parse_index(f[1], line_no) != reg.size())
          malformed(line_no, "node indices must be contiguous from 0");
        reg.emplace_back(f[2]);
        break;
      }
      case Section::classes:
        if (std::find(g.class_names.begin(), g.class_names.end(), line) != g.class_names.end())
          malformed(line_no, "duplicate class '" + std::string(line) + "'");
        g.class_names.emplace_back(line);
        break;
      case Section::labels: {
        const auto f = fields_of(line);
        if (f.size() != 3) malformed(line_no, "label line needs 3 fields");
        if (parse_index(f[0], line_no) != g.labels.size())
          malformed(line_no, "label lines must list documents in order");
        const auto split = parse_split(f[1]);
        if (!split) malformed(line_no, "unknown split '" + std::string(f[1]) + "'");
        auto it = std::find(g.class_names.begin(), g.class_names.end(), f[2]);
        if (it == g.class_names.end()) {
          if (explicit_classes) malformed(line_no, "undeclared class '" + std::string(f[2]) + "'");
          g.class_names.emplace_back(f[2]);
          it = g.class_names.end() - 1;
        }
        g.labels.push_back(static_cast<std::size_t>(it - g.class_names.begin()));
        g.splits.push_back(*split);
        break;
      }
      case Section::edges: {
        const auto f = fields_of(line);
        const auto etype = parse_edge_type(f[0]);
        if (!etype) malformed(line_no, "unknown edge type '" + std::string(f[0]) + "'");
        if (f.size() != 4) malformed(line_no, "edge line needs 4 fields");
        g.edges_of(*etype).push_back(
            {parse_index(f[1], line_no), parse_index(f[2], line_no), parse_weight(f[3], line_no)});
        break;
      }
    }
  }
  if (section != Section::edges)
    throw GraphFormatError(GraphFormatError::Kind::truncated, "graph file is missing sections");

  g.canonicalize();
  try {
    g.validate();
  } catch (const DataError& e) {
    throw GraphFormatError(GraphFormatError::Kind::malformed, std::string("invalid graph: ") + e.what());
  }
  return g;
}

void save_graph(const HetGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write graph file " + path.string());
  write_graph(graph, out);
  if (!out) throw DataError("failed writing graph file " + path.string());
}

HetGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open graph file " + path.string());
  return read_graph(in);
}

}  // namespace wctg

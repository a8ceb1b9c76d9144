#include "specmatch/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "specmatch/error.hpp"

namespace specmatch {

namespace {

struct PolyMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::vector<int>> polygons;  // 0-based indices
};

TriMesh fan_triangulate(const PolyMesh& poly) {
  TriMesh mesh;
  mesh.vertices.resize(static_cast<int>(poly.vertices.size()), 3);
  for (std::size_t i = 0; i < poly.vertices.size(); ++i) mesh.vertices.row(static_cast<int>(i)) = poly.vertices[i];

  std::size_t tri_count = 0;
  for (const auto& p : poly.polygons) {
    require(p.size() >= 3, ErrorCode::ParseError, "face with fewer than 3 vertices");
    tri_count += p.size() - 2;
  }
  mesh.faces.resize(static_cast<int>(tri_count), 3);
  int t = 0;
  for (const auto& p : poly.polygons) {
    for (std::size_t k = 1; k + 1 < p.size(); ++k) {
      mesh.faces(t, 0) = p[0];
      mesh.faces(t, 1) = p[k];
      mesh.faces(t, 2) = p[k + 1];
      ++t;
    }
  }
  mesh.validate();
  return mesh;
}

bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i == line.size() || line[i] == '#') continue;
    return true;
  }
  return false;
}

double parse_double(const std::string& token, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(token, &pos);
    require(pos == token.size(), ErrorCode::ParseError, std::string("bad number in ") + what + ": " + token);
    return v;
  } catch (const Error&) {
    throw;
  } catch (...) {
    fail(ErrorCode::ParseError, std::string("bad number in ") + what + ": " + token);
  }
}

long parse_long(const std::string& token, const char* what) {
  long v = 0;
  const auto* begin = token.data();
  const auto* end = token.data() + token.size();
  const auto res = std::from_chars(begin, end, v);
  require(res.ec == std::errc() && res.ptr == end, ErrorCode::ParseError,
          std::string("bad integer in ") + what + ": " + token);
  return v;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

TriMesh parse_obj(std::istream& in) {
  PolyMesh poly;
  std::string line;
  while (next_content_line(in, line)) {
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "v") {
      require(tokens.size() >= 4, ErrorCode::ParseError, "OBJ vertex line needs 3 coordinates");
      poly.vertices.emplace_back(parse_double(tokens[1], "OBJ vertex"), parse_double(tokens[2], "OBJ vertex"),
                                 parse_double(tokens[3], "OBJ vertex"));
    } else if (tokens[0] == "f") {
      require(tokens.size() >= 4, ErrorCode::ParseError, "OBJ face line needs at least 3 indices");
      std::vector<int> indices;
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        // accept i, i/t, i//n, i/t/n; only the vertex index matters here
        const std::string& ref = tokens[i];
        const auto slash = ref.find('/');
        const long raw = parse_long(ref.substr(0, slash), "OBJ face");
        require(raw != 0, ErrorCode::ParseError, "OBJ face index 0 is invalid");
        const long resolved = raw > 0 ? raw - 1 : static_cast<long>(poly.vertices.size()) + raw;
        require(resolved >= 0 && resolved < static_cast<long>(poly.vertices.size()), ErrorCode::IndexOutOfRange,
                "OBJ face index " + std::to_string(raw) + " out of range");
        indices.push_back(static_cast<int>(resolved));
      }
      poly.polygons.push_back(std::move(indices));
    }
    // all other records (vn, vt, usemtl, o, g, s, l, ...) are ignored
  }
  return fan_triangulate(poly);
}

TriMesh parse_off(std::istream& in) {
  std::string line;
  require(next_content_line(in, line), ErrorCode::ParseError, "empty OFF file");
  auto tokens = split_ws(line);
  // Header keyword is optional; counts may share the keyword line.
  if (!tokens.empty() && (tokens[0] == "OFF" || tokens[0] == "off")) {
    tokens.erase(tokens.begin());
    if (tokens.empty()) {
      require(next_content_line(in, line), ErrorCode::ParseError, "OFF missing counts line");
      tokens = split_ws(line);
    }
  }
  require(tokens.size() >= 2, ErrorCode::ParseError, "OFF counts line needs vertex and face counts");
  const long nv = parse_long(tokens[0], "OFF counts");
  const long nf = parse_long(tokens[1], "OFF counts");
  require(nv >= 0 && nf >= 0, ErrorCode::ParseError, "OFF counts must be nonnegative");

  PolyMesh poly;
  poly.vertices.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    require(next_content_line(in, line), ErrorCode::ParseError, "OFF truncated in vertex list");
    const auto vt = split_ws(line);
    require(vt.size() >= 3, ErrorCode::ParseError, "OFF vertex line needs 3 coordinates");
    poly.vertices.emplace_back(parse_double(vt[0], "OFF vertex"), parse_double(vt[1], "OFF vertex"),
                               parse_double(vt[2], "OFF vertex"));
  }
  poly.polygons.reserve(static_cast<std::size_t>(nf));
  for (long i = 0; i < nf; ++i) {
    require(next_content_line(in, line), ErrorCode::ParseError, "OFF truncated in face list");
    const auto ft = split_ws(line);
    require(!ft.empty(), ErrorCode::ParseError, "OFF empty face line");
    const long k = parse_long(ft[0], "OFF face");
    require(k >= 3 && ft.size() >= static_cast<std::size_t>(k) + 1, ErrorCode::ParseError,
            "OFF face with bad vertex count");
    std::vector<int> indices;
    indices.reserve(static_cast<std::size_t>(k));
    for (long j = 0; j < k; ++j) {
      const long idx = parse_long(ft[static_cast<std::size_t>(j) + 1], "OFF face");
      require(idx >= 0 && idx < nv, ErrorCode::IndexOutOfRange,
              "OFF face index " + std::to_string(idx) + " out of range");
      indices.push_back(static_cast<int>(idx));
    }
    poly.polygons.push_back(std::move(indices));
  }
  return fan_triangulate(poly);
}

TriMesh parse_ply_ascii(std::istream& in) {
  std::string line;
  require(next_content_line(in, line) && split_ws(line)[0] == "ply", ErrorCode::ParseError,
          "PLY missing 'ply' magic");

  struct Element {
    std::string name;
    long count = 0;
    std::vector<std::string> properties;  // scalar property names, in order
    bool has_list = false;
  };
  std::vector<Element> elements;
  bool format_seen = false;

  while (true) {
    require(next_content_line(in, line), ErrorCode::ParseError, "PLY truncated header");
    auto tokens = split_ws(line);
    if (tokens[0] == "comment" || tokens[0] == "obj_info") continue;
    if (tokens[0] == "format") {
      require(tokens.size() >= 2 && tokens[1] == "ascii", ErrorCode::ParseError,
              "only ASCII PLY is supported");
      format_seen = true;
    } else if (tokens[0] == "element") {
      require(tokens.size() >= 3, ErrorCode::ParseError, "PLY element line malformed");
      elements.push_back({tokens[1], parse_long(tokens[2], "PLY element count"), {}, false});
    } else if (tokens[0] == "property") {
      require(!elements.empty() && tokens.size() >= 3, ErrorCode::ParseError, "PLY property before element");
      if (tokens[1] == "list") {
        elements.back().has_list = true;
      } else {
        elements.back().properties.push_back(tokens.back());
      }
    } else if (tokens[0] == "end_header") {
      break;
    } else {
      fail(ErrorCode::ParseError, "unrecognized PLY header line: " + line);
    }
  }
  require(format_seen, ErrorCode::ParseError, "PLY missing format line");

  PolyMesh poly;
  for (const auto& elem : elements) {
    if (elem.name == "vertex") {
      int ix = -1, iy = -1, iz = -1;
      for (std::size_t i = 0; i < elem.properties.size(); ++i) {
        if (elem.properties[i] == "x") ix = static_cast<int>(i);
        if (elem.properties[i] == "y") iy = static_cast<int>(i);
        if (elem.properties[i] == "z") iz = static_cast<int>(i);
      }
      require(ix >= 0 && iy >= 0 && iz >= 0, ErrorCode::ParseError, "PLY vertex element lacks x/y/z");
      for (long i = 0; i < elem.count; ++i) {
        require(next_content_line(in, line), ErrorCode::ParseError, "PLY truncated in vertex list");
        const auto vt = split_ws(line);
        require(vt.size() >= elem.properties.size(), ErrorCode::ParseError, "PLY vertex line too short");
        poly.vertices.emplace_back(parse_double(vt[ix], "PLY vertex"), parse_double(vt[iy], "PLY vertex"),
                                   parse_double(vt[iz], "PLY vertex"));
      }
    } else if (elem.name == "face") {
      require(elem.has_list, ErrorCode::ParseError, "PLY face element lacks list property");
      for (long i = 0; i < elem.count; ++i) {
        require(next_content_line(in, line), ErrorCode::ParseError, "PLY truncated in face list");
        const auto ft = split_ws(line);
        require(!ft.empty(), ErrorCode::ParseError, "PLY empty face line");
        const long k = parse_long(ft[0], "PLY face");
        require(k >= 3 && ft.size() >= static_cast<std::size_t>(k) + 1, ErrorCode::ParseError,
                "PLY face with bad vertex count");
        std::vector<int> indices;
        for (long j = 0; j < k; ++j) {
          const long idx = parse_long(ft[static_cast<std::size_t>(j) + 1], "PLY face");
          require(idx >= 0 && idx < static_cast<long>(poly.vertices.size()), ErrorCode::IndexOutOfRange,
                  "PLY face index " + std::to_string(idx) + " out of range");
          indices.push_back(static_cast<int>(idx));
        }
        poly.polygons.push_back(std::move(indices));
      }
    } else {
      // skip unknown element bodies line by line
      for (long i = 0; i < elem.count; ++i) {
        require(next_content_line(in, line), ErrorCode::ParseError, "PLY truncated in unknown element");
      }
    }
  }
  return fan_triangulate(poly);
}

MeshFormat format_from_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".obj") return MeshFormat::Obj;
  if (ext == ".off") return MeshFormat::Off;
  if (ext == ".ply") return MeshFormat::PlyAscii;
  fail(ErrorCode::ParseError, "cannot infer mesh format from extension '" + ext + "'");
}

}  // namespace

TriMesh parse_mesh_text(const std::string& text, MeshFormat format) {
  std::istringstream in(text);
  switch (format) {
    case MeshFormat::Obj: return parse_obj(in);
    case MeshFormat::Off: return parse_off(in);
    case MeshFormat::PlyAscii: return parse_ply_ascii(in);
    case MeshFormat::Auto: break;
  }
  fail(ErrorCode::InvalidArgument, "parse_mesh_text requires an explicit format");
}

TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  require(std::filesystem::exists(path), ErrorCode::MissingFile, path.string());
  if (format == MeshFormat::Auto) format = format_from_extension(path);
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_mesh_text(buffer.str(), format);
}

std::string mesh_to_obj_text(const TriMesh& mesh) {
  std::string out;
  out.reserve(static_cast<std::size_t>(mesh.vertex_count()) * 60 + static_cast<std::size_t>(mesh.face_count()) * 24);
  char buf[128];
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", mesh.vertices(i, 0), mesh.vertices(i, 1),
                  mesh.vertices(i, 2));
    out += buf;
  }
  for (int f = 0; f < mesh.face_count(); ++f) {
    std::snprintf(buf, sizeof buf, "f %d %d %d\n", mesh.faces(f, 0) + 1, mesh.faces(f, 1) + 1, mesh.faces(f, 2) + 1);
    out += buf;
  }
  return out;
}

void save_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
  out << mesh_to_obj_text(mesh);
  require(out.good(), ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace specmatch

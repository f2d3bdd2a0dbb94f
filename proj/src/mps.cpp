#include "homlp/mps.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace homlp {
namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

enum class Section { None, Name, Objsense, Rows, Columns, Rhs, Ranges, Bounds };

}  // namespace

MpsDocument read_mps_document(std::string_view text) {
  MpsDocument doc;
  std::unordered_map<std::string, char> row_type;
  std::unordered_set<std::string> free_rows;  // extra N rows, ignored
  std::unordered_set<std::string> col_seen;
  std::unordered_set<std::string> rhs_seen, range_seen;
  Section sec = Section::None;
  bool saw_rows = false;
  std::string last_col;

  auto check_row = [&](const std::string& r, int line) {
    if (r == doc.objective_row || row_type.count(r)) return true;
    if (free_rows.count(r)) return false;
    throw UnknownRowName("unknown row '" + r + "'", line);
  };

  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    auto tok = split(raw);
    if (tok.empty() || tok[0][0] == '*') continue;

    const bool indented = std::isspace(static_cast<unsigned char>(raw[0]));
    const std::string key = upper(tok[0]);
    const bool keyword = key == "ROWS" || key == "COLUMNS" || key == "RHS" || key == "RANGES" || key == "BOUNDS" ||
                         key == "ENDATA";
    if (!indented && key == "NAME") {
      sec = Section::Name;
      if (tok.size() > 1) doc.name = tok[1];
      continue;
    }
    if (!indented && key == "OBJSENSE") {
      sec = Section::Objsense;
      if (tok.size() > 1) tok.erase(tok.begin());
      else continue;
    } else if (keyword && tok.size() == 1) {
      if (key == "ROWS") sec = Section::Rows, saw_rows = true;
      if (key == "COLUMNS") sec = Section::Columns;
      if (key == "RHS") sec = Section::Rhs;
      if (key == "RANGES") sec = Section::Ranges;
      if (key == "BOUNDS") sec = Section::Bounds;
      if (key == "ENDATA") break;
      continue;
    } else if (!indented && tok.size() == 1) {
      throw UnsupportedSection("unsupported section '" + tok[0] + "'", lineno);
    }

    switch (sec) {
      case Section::None:
      case Section::Name:
        throw MpsSyntaxError("data line outside a section", lineno);
      case Section::Objsense: {
        const std::string v = upper(tok[0]);
        if (v == "MAX" || v == "MAXIMIZE") doc.maximize = true;
        else if (v == "MIN" || v == "MINIMIZE") doc.maximize = false;
        else throw MpsSyntaxError("bad OBJSENSE '" + tok[0] + "'", lineno);
        break;
      }
      case Section::Rows: {
        if (tok.size() != 2) throw MpsSyntaxError("ROWS line needs type and name", lineno);
        const std::string t = upper(tok[0]);
        if (t.size() != 1 || std::string("NELG").find(t[0]) == std::string::npos)
          throw MpsSyntaxError("bad row type '" + tok[0] + "'", lineno);
        const std::string& name = tok[1];
        if (row_type.count(name) || free_rows.count(name) || name == doc.objective_row)
          throw MpsSyntaxError("duplicate row '" + name + "'", lineno);
        if (t[0] == 'N') {
          if (doc.objective_row.empty())
            doc.objective_row = name;
          else
            free_rows.insert(name);
        } else {
          row_type.emplace(name, t[0]);
          doc.rows.push_back({t[0], name});
        }
        break;
      }
      case Section::Columns: {
        if (tok.size() >= 2 && upper(tok[1]) == "'MARKER'")
          throw MpsSyntaxError("integer markers are not supported", lineno);
        if (tok.size() != 3 && tok.size() != 5) throw MpsSyntaxError("COLUMNS line needs 3 or 5 fields", lineno);
        const std::string& col = tok[0];
        if (col != last_col) {
          if (col_seen.count(col)) throw MpsSyntaxError("column '" + col + "' is not contiguous", lineno);
          col_seen.insert(col);
          doc.columns.push_back(col);
          last_col = col;
        }
        for (std::size_t k = 1; k + 1 < tok.size(); k += 2)
          if (check_row(tok[k], lineno)) doc.coefficients.push_back({col, tok[k], tok[k + 1], lineno});
        break;
      }
      case Section::Rhs:
      case Section::Ranges: {
        // Optional set name: odd field count means it is present.
        std::size_t k = tok.size() % 2 == 1 ? 1 : 0;
        if (tok.size() < 2 || tok.size() > 5) throw MpsSyntaxError("malformed RHS/RANGES line", lineno);
        auto& dst = sec == Section::Rhs ? doc.rhs : doc.ranges;
        for (; k + 1 < tok.size(); k += 2) {
          if (!check_row(tok[k], lineno)) continue;
          if (sec == Section::Ranges && tok[k] == doc.objective_row)
            throw MpsSyntaxError("RANGES on the objective row", lineno);
          auto& seen = sec == Section::Rhs ? rhs_seen : range_seen;
          if (!seen.insert(tok[k]).second) throw MpsSyntaxError("duplicate entry for row '" + tok[k] + "'", lineno);
          dst.push_back({"", tok[k], tok[k + 1], lineno});
        }
        break;
      }
      case Section::Bounds: {
        const std::string t = upper(tok[0]);
        const bool valued = t == "UP" || t == "LO" || t == "FX";
        const bool valueless = t == "FR" || t == "MI" || t == "PL";
        if (t == "BV" || t == "LI" || t == "UI" || t == "SC")
          throw MpsSyntaxError("integer bound type '" + tok[0] + "' is not supported", lineno);
        if (!valued && !valueless) throw MpsSyntaxError("bad bound type '" + tok[0] + "'", lineno);
        std::string col, value;
        if (valued) {
          if (tok.size() == 4) col = tok[2], value = tok[3];
          else if (tok.size() == 3) col = tok[1], value = tok[2];
          else throw MpsSyntaxError("malformed BOUNDS line", lineno);
        } else {
          if (tok.size() == 3) col = tok[2];
          else if (tok.size() == 2) col = tok[1];
          else throw MpsSyntaxError("malformed BOUNDS line", lineno);
        }
        if (!col_seen.count(col)) throw MpsSyntaxError("unknown column '" + col + "'", lineno);
        doc.bounds.push_back({t, col, value, lineno});
        break;
      }
    }
  }
  if (!saw_rows) throw MpsSyntaxError("missing ROWS section", lineno);
  return doc;
}

}  // namespace homlp

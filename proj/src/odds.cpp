#include "aggr/odds.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace aggr {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// One CSV line with RFC-4180 quoting.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Accepts DD/MM/YYYY, DD/MM/YY and YYYY-MM-DD; returns a sortable key.
std::string normalize_date(const std::string& raw, long row) {
  const std::string s = trim(raw);
  auto fail = [&]() -> std::string {
    throw ParseError("row " + std::to_string(row) + ": unrecognized date '" + s + "'");
  };
  if (s.size() == 10 && s[4] == '-' && s[7] == '-') return s;
  const size_t a = s.find('/');
  const size_t b = s.find('/', a + 1);
  if (a == std::string::npos || b == std::string::npos) return fail();
  const std::string dd = s.substr(0, a), mm = s.substr(a + 1, b - a - 1);
  std::string yy = s.substr(b + 1);
  if (dd.empty() || mm.empty() || yy.empty()) return fail();
  for (const auto& part : {dd, mm, yy})
    for (char c : part)
      if (!std::isdigit(static_cast<unsigned char>(c))) return fail();
  if (yy.size() == 2) yy = (std::stoi(yy) < 70 ? "20" : "19") + yy;
  auto pad = [](const std::string& p) { return p.size() == 1 ? "0" + p : p; };
  return yy + "-" + pad(mm) + "-" + pad(dd);
}

double parse_odds_cell(const std::string& cell, long row, const std::string& col) {
  const std::string s = trim(cell);
  double v = 0.0;
  size_t pos = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ParseError("row " + std::to_string(row) + ": bad odds in " + col + ": '" + s + "'");
  }
  if (pos != s.size())
    throw ParseError("row " + std::to_string(row) + ": bad odds in " + col + ": '" + s + "'");
  if (!(v > 1.0))
    throw ParseError("row " + std::to_string(row) + ": odds in " + col +
                     " must exceed 1, got " + s);
  return v;
}

}  // namespace

Distribution odds_to_probabilities(const Vec& odds) {
  Vec inv(odds.size());
  for (Eigen::Index i = 0; i < odds.size(); ++i) {
    if (!(odds(i) > 1.0)) throw DomainError("odds_to_probabilities: odds must exceed 1");
    inv(i) = 1.0 / odds(i);
  }
  return Distribution(inv / inv.sum());
}

ColumnMap ColumnMap::football_data(const std::vector<std::string>& bookmaker_prefixes) {
  ColumnMap map;
  for (const std::string& p : bookmaker_prefixes)
    map.bookmakers.push_back({p, {p + "H", p + "D", p + "A"}});
  return map;
}

ColumnMap ColumnMap::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open column map " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError("column map " + path + ": " + e.what());
  }
  ColumnMap map;
  map.date = j.value("date", map.date);
  map.league = j.value("league", map.league);
  map.home = j.value("home", map.home);
  map.away = j.value("away", map.away);
  map.result = j.value("result", map.result);
  if (j.contains("bookmakers")) {
    for (auto& [name, cols] : j.at("bookmakers").items()) {
      if (cols.is_array() && cols.size() == 3) {
        map.bookmakers.push_back({name, {cols[0].get<std::string>(),
                                         cols[1].get<std::string>(),
                                         cols[2].get<std::string>()}});
      } else {
        throw SchemaError("column map: bookmaker " + name + " needs [H,D,A] columns");
      }
    }
  }
  std::sort(map.bookmakers.begin(), map.bookmakers.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return map;
}

IngestResult ingest_odds_csv(const std::string& path, const ColumnMap& map) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path);
  if (map.bookmakers.empty()) throw SchemaError("ingest_odds_csv: no bookmakers selected");

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("ingest_odds_csv: empty file (no header)");
  const std::vector<std::string> header = split_csv_line(line);
  auto find_col = [&](const std::string& name) {
    for (size_t i = 0; i < header.size(); ++i)
      if (trim(header[i]) == name) return static_cast<long>(i);
    return -1L;
  };

  std::vector<std::string> missing;
  auto require = [&](const std::string& name) {
    const long idx = find_col(name);
    if (idx < 0) missing.push_back(name);
    return idx;
  };
  const long c_date = require(map.date);
  const long c_league = require(map.league);
  const long c_home = require(map.home);
  const long c_away = require(map.away);
  const long c_result = require(map.result);
  std::vector<std::array<long, 3>> c_books;
  for (const auto& [name, cols] : map.bookmakers)
    c_books.push_back({require(cols[0]), require(cols[1]), require(cols[2])});
  if (!missing.empty()) {
    std::string msg = "missing columns:";
    for (const std::string& m : missing) msg += " " + m;
    throw SchemaError(msg);
  }

  IngestResult result;
  long row = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    ++result.total_rows;
    const std::vector<std::string> cells = split_csv_line(line);
    auto cell = [&](long idx) -> std::string {
      return idx < static_cast<long>(cells.size()) ? cells[static_cast<size_t>(idx)] : "";
    };

    bool incomplete = false;
    for (const auto& cols : c_books)
      for (long idx : cols)
        if (trim(cell(idx)).empty()) incomplete = true;
    if (incomplete) {
      ++result.dropped_rows;
      continue;
    }

    OddsRecord rec;
    rec.date_key = normalize_date(cell(c_date), row);
    rec.league = trim(cell(c_league));
    rec.home_team = trim(cell(c_home));
    rec.away_team = trim(cell(c_away));
    const std::string res = trim(cell(c_result));
    if (res == "H") {
      rec.outcome = 0;
    } else if (res == "D") {
      rec.outcome = 1;
    } else if (res == "A") {
      rec.outcome = 2;
    } else {
      throw ParseError("row " + std::to_string(row) + ": result must be H/D/A, got '" +
                       res + "'");
    }
    for (size_t b = 0; b < c_books.size(); ++b) {
      Vec odds(3);
      for (int i = 0; i < 3; ++i)
        odds(i) = parse_odds_cell(cell(c_books[b][i]), row,
                                  map.bookmakers[b].second[static_cast<size_t>(i)]);
      rec.bookmaker_odds.push_back(odds);
    }
    result.records.push_back(std::move(rec));
  }

  std::stable_sort(result.records.begin(), result.records.end(),
                   [](const OddsRecord& a, const OddsRecord& b) {
                     if (a.date_key != b.date_key) return a.date_key < b.date_key;
                     if (a.league != b.league) return a.league < b.league;
                     return a.home_team < b.home_team;
                   });

  for (const OddsRecord& rec : result.records) {
    GameRound round;
    round.outcome = rec.outcome;
    for (const Vec& odds : rec.bookmaker_odds)
      round.expert_predictions.push_back(odds_to_probabilities(odds));
    result.games.push_back(std::move(round));
  }
  return result;
}

}  // namespace aggr

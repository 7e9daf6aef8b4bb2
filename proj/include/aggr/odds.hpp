#pragma once

#include <array>
#include <string>
#include <vector>

#include "aggr/aggregation.hpp"

namespace aggr {

/// p_i = (1/odds_i) / sum_j (1/odds_j); all odds must exceed 1.
Distribution odds_to_probabilities(const Vec& odds);

/// Maps CSV columns onto the fields the ingestion needs. The defaults follow
/// the football-data.co.uk convention (FTR result column, bookmaker prefixes
/// like B365 expanding to B365H/B365D/B365A).
struct ColumnMap {
  std::string date = "Date";
  std::string league = "Div";
  std::string home = "HomeTeam";
  std::string away = "AwayTeam";
  std::string result = "FTR";
  std::vector<std::pair<std::string, std::array<std::string, 3>>> bookmakers;

  static ColumnMap football_data(const std::vector<std::string>& bookmaker_prefixes);
  static ColumnMap from_json_file(const std::string& path);
};

struct OddsRecord {
  std::string date_key;  // normalized YYYY-MM-DD
  std::string league;
  std::string home_team;
  std::string away_team;
  int outcome;                      // 0 home, 1 draw, 2 away
  std::vector<Vec> bookmaker_odds;  // one (H,D,A) triple per bookmaker
};

struct IngestResult {
  std::vector<GameRound> games;  // one expert per bookmaker, outcomes in [3]
  std::vector<OddsRecord> records;
  long total_rows = 0;
  long dropped_rows = 0;  // rows missing odds for a selected bookmaker
};

/// Reads a CSV with a header row, sorts records by (date, league, home team)
/// and converts each bookmaker's odds triple into an expert prediction.
/// Rows with empty odds cells are dropped and counted; malformed values
/// (including odds <= 1) raise ParseError naming the row.
IngestResult ingest_odds_csv(const std::string& path, const ColumnMap& map);

}  // namespace aggr

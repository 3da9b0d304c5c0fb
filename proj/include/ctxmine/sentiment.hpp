#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ctxmine {

// Sentiment lexicon: lowercase token -> nonzero integer weight.
struct Lexicon {
    std::map<std::string, int> entries;
};

// One tweet as shipped in the tab-separated corpus files.
struct TweetRecord {
    std::string id;
    std::string team;
    std::optional<std::string> country;
    std::string text;
};

// Per-team coefficient: atss == score_sum / tweet_count.
struct TeamCoefficient {
    std::string team;
    double atss = 0.0;
    std::size_t tweet_count = 0;
    std::int64_t score_sum = 0;
};

// Parses lexicon text: one "token<TAB>weight" per line, '#' comment lines and
// blank lines ignored.  Tokens are lowercased; duplicates (after folding),
// empty tokens, zero weights and malformed lines are errors naming the line.
Lexicon parse_lexicon(const std::string& text);
Lexicon load_lexicon(const std::string& path);

// Parses the corpus: one tweet per line, tab-separated id, team, country,
// text.  The text field may itself contain tabs (only the first three tabs
// delimit).  Empty country becomes "no label"; empty team is an error.
std::vector<TweetRecord> parse_tweets(const std::string& text);
std::vector<TweetRecord> load_tweets(const std::string& path);

// Sum of lexicon weights over the tokens of `text`.  Tokens are maximal runs
// of alphanumeric (or non-ASCII) bytes, ASCII-lowercased; repeats count every
// time, unknown tokens contribute 0.
int score_text(const Lexicon& lex, const std::string& text);

// Element-wise score_text, order preserving.
std::vector<int> score_corpus(const Lexicon& lex, const std::vector<TweetRecord>& tweets);

// Groups scores by team label (exact match) and computes ATSS per team.
// Output is sorted by team name; teams with zero tweets cannot appear.
// Throws std::invalid_argument when the vectors differ in length.
std::vector<TeamCoefficient> team_coefficients(const std::vector<int>& scores,
                                               const std::vector<TweetRecord>& tweets);

// Team names ordered by descending ATSS; ties broken by descending
// tweet_count, then ascending team name.
std::vector<std::string> rank_teams(const std::vector<TeamCoefficient>& coeffs);

// Mean score per country over tweets that carry a country label.
std::map<std::string, double> country_aggregate(const std::vector<int>& scores,
                                                const std::vector<TweetRecord>& tweets);

// CSV (team, atss, tweet_count) in the given order.
std::string coefficients_csv(const std::vector<TeamCoefficient>& coeffs);

}  // namespace ctxmine

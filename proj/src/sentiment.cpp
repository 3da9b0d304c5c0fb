#include "ctxmine/sentiment.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ctxmine/util.hpp"

namespace ctxmine {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Splits on '\n', dropping a trailing '\r' per line so CRLF files work.
std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        std::string line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

// A token byte is ASCII alphanumeric or any non-ASCII byte, so UTF-8
// sequences stay glued together inside one token.
bool is_token_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
           c >= 0x80;
}

int parse_weight(const std::string& s, std::size_t line_no) {
    int value = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw std::runtime_error("lexicon line " + std::to_string(line_no) +
                                 ": bad weight \"" + s + "\"");
    return value;
}

}  // namespace

Lexicon parse_lexicon(const std::string& text) {
    Lexicon lex;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        const std::size_t line_no = i + 1;
        if (line.empty() || line[0] == '#') continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("lexicon line " + std::to_string(line_no) +
                                     ": expected token<TAB>weight");
        std::string token = lowercase_ascii(line.substr(0, tab));
        if (token.empty())
            throw std::runtime_error("lexicon line " + std::to_string(line_no) +
                                     ": empty token");
        const int weight = parse_weight(line.substr(tab + 1), line_no);
        if (weight == 0)
            throw std::runtime_error("lexicon line " + std::to_string(line_no) +
                                     ": zero weight for \"" + token + "\"");
        if (!lex.entries.emplace(std::move(token), weight).second)
            throw std::runtime_error("lexicon line " + std::to_string(line_no) +
                                     ": duplicate token \"" +
                                     lowercase_ascii(line.substr(0, tab)) + "\"");
    }
    return lex;
}

Lexicon load_lexicon(const std::string& path) { return parse_lexicon(read_file(path)); }

std::vector<TweetRecord> parse_tweets(const std::string& text) {
    std::vector<TweetRecord> tweets;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        const std::size_t line_no = i + 1;
        if (line.empty()) continue;
        const std::size_t t1 = line.find('\t');
        const std::size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        const std::size_t t3 = t2 == std::string::npos ? t2 : line.find('\t', t2 + 1);
        if (t3 == std::string::npos)
            throw std::runtime_error("tweet line " + std::to_string(line_no) +
                                     ": expected id, team, country, text separated by tabs");
        TweetRecord rec;
        rec.id = line.substr(0, t1);
        rec.team = line.substr(t1 + 1, t2 - t1 - 1);
        std::string country = line.substr(t2 + 1, t3 - t2 - 1);
        rec.text = line.substr(t3 + 1);
        if (rec.team.empty())
            throw std::runtime_error("tweet line " + std::to_string(line_no) +
                                     ": empty team label");
        if (!country.empty()) rec.country = std::move(country);
        tweets.push_back(std::move(rec));
    }
    return tweets;
}

std::vector<TweetRecord> load_tweets(const std::string& path) {
    return parse_tweets(read_file(path));
}

int score_text(const Lexicon& lex, const std::string& text) {
    int score = 0;
    std::string token;
    const auto flush = [&] {
        if (token.empty()) return;
        auto it = lex.entries.find(token);
        if (it != lex.entries.end()) score += it->second;
        token.clear();
    };
    for (unsigned char c : text) {
        if (is_token_byte(c))
            token.push_back(ascii_lower(static_cast<char>(c)));
        else
            flush();
    }
    flush();
    return score;
}

std::vector<int> score_corpus(const Lexicon& lex, const std::vector<TweetRecord>& tweets) {
    std::vector<int> scores;
    scores.reserve(tweets.size());
    for (const auto& t : tweets) scores.push_back(score_text(lex, t.text));
    return scores;
}

std::vector<TeamCoefficient> team_coefficients(const std::vector<int>& scores,
                                               const std::vector<TweetRecord>& tweets) {
    if (scores.size() != tweets.size())
        throw std::invalid_argument("team_coefficients: scores and tweets differ in length");
    // std::map keeps team keys sorted, which fixes the reduction order.
    std::map<std::string, std::pair<std::int64_t, std::size_t>> groups;
    for (std::size_t i = 0; i < tweets.size(); ++i) {
        auto& [sum, count] = groups[tweets[i].team];
        sum += scores[i];
        ++count;
    }
    std::vector<TeamCoefficient> out;
    out.reserve(groups.size());
    for (const auto& [team, agg] : groups) {
        TeamCoefficient c;
        c.team = team;
        c.score_sum = agg.first;
        c.tweet_count = agg.second;
        c.atss = static_cast<double>(agg.first) / static_cast<double>(agg.second);
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<std::string> rank_teams(const std::vector<TeamCoefficient>& coeffs) {
    std::vector<const TeamCoefficient*> order;
    order.reserve(coeffs.size());
    for (const auto& c : coeffs) order.push_back(&c);
    std::sort(order.begin(), order.end(),
              [](const TeamCoefficient* a, const TeamCoefficient* b) {
                  if (a->atss != b->atss) return a->atss > b->atss;
                  if (a->tweet_count != b->tweet_count) return a->tweet_count > b->tweet_count;
                  return a->team < b->team;
              });
    std::vector<std::string> names;
    names.reserve(order.size());
    for (const auto* c : order) names.push_back(c->team);
    return names;
}

std::map<std::string, double> country_aggregate(const std::vector<int>& scores,
                                                const std::vector<TweetRecord>& tweets) {
    if (scores.size() != tweets.size())
        throw std::invalid_argument("country_aggregate: scores and tweets differ in length");
    std::map<std::string, std::pair<std::int64_t, std::size_t>> groups;
    for (std::size_t i = 0; i < tweets.size(); ++i) {
        if (!tweets[i].country) continue;
        auto& [sum, count] = groups[*tweets[i].country];
        sum += scores[i];
        ++count;
    }
    std::map<std::string, double> out;
    for (const auto& [country, agg] : groups)
        out[country] = static_cast<double>(agg.first) / static_cast<double>(agg.second);
    return out;
}

std::string coefficients_csv(const std::vector<TeamCoefficient>& coeffs) {
    std::string out = "team,atss,tweet_count\n";
    for (const auto& c : coeffs) {
        // Team labels in the shipped corpora are plain words, but quote the
        // CSV-hostile ones anyway.
        std::string team = c.team;
        if (team.find_first_of(",\"\n\r") != std::string::npos) {
            std::string quoted = "\"";
            for (char ch : team) {
                quoted += ch;
                if (ch == '"') quoted += '"';
            }
            quoted += '"';
            team = std::move(quoted);
        }
        out += team;
        out += ',';
        out += format_double(c.atss);
        out += ',';
        out += std::to_string(c.tweet_count);
        out += '\n';
    }
    return out;
}

}  // namespace ctxmine

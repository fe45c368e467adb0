#include "biaseval/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "biaseval/unicode.hpp"

namespace biaseval {
namespace {

bool mostly_latin(const std::vector<std::string>& tokens) {
  std::size_t latin = 0;
  for (const auto& t : tokens) {
    bool ascii = std::all_of(t.begin(), t.end(), [](unsigned char c) { return c < 0x80; });
    if (ascii) {
      latin += std::any_of(t.begin(), t.end(), [](unsigned char c) { return std::isalpha(c); });
    } else {
      latin += unicode::has_latin(t) && !unicode::has_devanagari(t);
    }
  }
  return 2 * latin > tokens.size();
}

std::string describe_line(std::size_t line_no) { return "line " + std::to_string(line_no); }

// Splits on spaces, ignoring empty fields so a trailing space is harmless.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    std::size_t next = line.find(' ', pos);
    if (next == std::string_view::npos) next = line.size();
    if (next > pos) out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::string name, std::size_t dim,
                               std::vector<std::pair<std::string, Vector>> rows)
    : name_(std::move(name)), dim_(dim) {
  if (dim_ == 0) throw InputError("embedding '" + name_ + "': dimension must be positive");
  tokens_.reserve(rows.size());
  data_.reserve(rows.size() * dim_);
  for (auto& [raw_token, vec] : rows) {
    if (vec.size() != dim_) {
      throw InputError("embedding '" + name_ + "': token '" + raw_token + "' has " +
                       std::to_string(vec.size()) + " components, expected " +
                       std::to_string(dim_));
    }
    for (double x : vec) {
      if (!std::isfinite(x)) {
        throw InputError("embedding '" + name_ + "': token '" + raw_token +
                         "' has a non-finite component");
      }
    }
    std::string token = unicode::nfc(raw_token);
    if (token.empty()) throw InputError("embedding '" + name_ + "': empty token");
    if (!index_.emplace(token, tokens_.size()).second) {
      ++duplicates_;
      continue;
    }
    tokens_.push_back(std::move(token));
    data_.insert(data_.end(), vec.begin(), vec.end());
  }
  if (tokens_.empty()) throw InputError("embedding '" + name_ + "': empty vocabulary");
  fold_case_default_ = mostly_latin(tokens_);
}

std::optional<VectorView> EmbeddingTable::find_exact(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return row(it->second);
}

std::optional<VectorView> EmbeddingTable::lookup(std::string_view token, bool fold_case) const {
  if (token.empty()) return std::nullopt;
  std::string key = unicode::nfc(token);
  if (fold_case) {
    std::string folded = unicode::lower(key);
    if (auto hit = find_exact(folded)) return hit;
  }
  return find_exact(key);
}

EmbeddingTable parse_word2vec_text(std::string_view text, std::string name) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  if (!next_line(line)) throw InputError("embedding '" + name + "': empty file");
  auto header = split_fields(line);
  std::size_t count = 0;
  std::size_t dim = 0;
  if (header.size() != 2 || !parse_number(header[0], count) || !parse_number(header[1], dim) ||
      dim == 0) {
    throw InputError("embedding '" + name + "': malformed header \"" + std::string(line) +
                     "\", expected \"<vocab_count> <dim>\"");
  }
  if (count == 0) throw InputError("embedding '" + name + "': empty vocabulary");

  std::vector<std::pair<std::string, Vector>> rows;
  rows.reserve(count);
  while (next_line(line)) {
    if (line.empty() && pos >= text.size()) break;  // trailing newline
    auto fields = split_fields(line);
    if (fields.empty()) {
      throw InputError("embedding '" + name + "': blank row at " + describe_line(line_no));
    }
    if (fields.size() - 1 != dim) {
      throw InputError("embedding '" + name + "': row arity " + std::to_string(fields.size() - 1) +
                       " != dim " + std::to_string(dim) + " at " + describe_line(line_no));
    }
    Vector vec(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      if (!parse_number(fields[j + 1], vec[j])) {
        throw InputError("embedding '" + name + "': bad number \"" + std::string(fields[j + 1]) +
                         "\" at " + describe_line(line_no));
      }
      if (!std::isfinite(vec[j])) {
        throw InputError("embedding '" + name + "': non-finite component at " +
                         describe_line(line_no));
      }
    }
    rows.emplace_back(std::string(fields[0]), std::move(vec));
  }
  if (rows.size() != count) {
    throw InputError("embedding '" + name + "': header declares " + std::to_string(count) +
                     " rows, file has " + std::to_string(rows.size()));
  }
  return EmbeddingTable(std::move(name), dim, std::move(rows));
}

EmbeddingTable load_word2vec_text(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open embedding file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_word2vec_text(text, std::move(name));
}

void write_word2vec_text(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << table.size() << ' ' << table.dim() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.tokens()[i];
    for (double x : table.row(i)) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
      out << ' ' << std::string_view(buf, end - buf);
    }
    out << '\n';
  }
}

VocabularyLossError::VocabularyLossError(Kind kind, std::string set_name, double loss_fraction,
                                         std::vector<std::string> dropped)
    : ComputationError([&] {
        std::ostringstream msg;
        std::string label = set_name.empty() ? std::string("word set") : "set '" + set_name + "'";
        if (kind == Kind::kEmptyResult) {
          msg << label << ": no word found in the embedding";
        } else {
          msg << label << ": " << dropped.size() << " words out of vocabulary (loss "
              << loss_fraction << "), word list and embedding look incompatible";
        }
        return msg.str();
      }()),
      kind_(kind),
      set_name_(std::move(set_name)),
      loss_fraction_(loss_fraction),
      dropped_(std::move(dropped)) {}

WordResolution resolve_word_set(const EmbeddingTable& table, const std::vector<std::string>& words,
                                double lost_threshold, std::string_view set_name) {
  if (words.empty()) throw InputError("cannot resolve an empty word list");
  if (!(lost_threshold >= 0.0 && lost_threshold <= 1.0)) {
    throw InputError("lost threshold must lie in [0, 1]");
  }
  WordResolution res;
  for (const auto& w : words) {
    if (auto hit = table.lookup(w)) {
      res.found.emplace_back(w, Vector(hit->begin(), hit->end()));
    } else {
      res.dropped.push_back(w);
    }
  }
  res.loss_fraction = static_cast<double>(res.dropped.size()) / static_cast<double>(words.size());
  if (res.found.empty()) {
    throw VocabularyLossError(VocabularyLossError::Kind::kEmptyResult, std::string(set_name),
                              res.loss_fraction, res.dropped);
  }
  if (res.loss_fraction > lost_threshold + 1e-12) {
    throw VocabularyLossError(VocabularyLossError::Kind::kExcessiveLoss, std::string(set_name),
                              res.loss_fraction, res.dropped);
  }
  return res;
}

double dot(VectorView u, VectorView v) {
  if (u.size() != v.size()) {
    throw ComputationError("dimension mismatch: " + std::to_string(u.size()) + " vs " +
                           std::to_string(v.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double l2_norm(VectorView v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double cosine(VectorView u, VectorView v) {
  double uv = dot(u, v);
  double uu = dot(u, u);
  double vv = dot(v, v);
  if (uu == 0.0 || vv == 0.0) throw ComputationError("cosine of a zero-norm vector");
  // sqrt(x * x) == x exactly, so cosine(v, v) is exactly 1.
  return std::clamp(uv / std::sqrt(uu * vv), -1.0, 1.0);
}

}  // namespace biaseval

#include "rumor/user_table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "json.hpp"
#include "rumor/adadelta.hpp"
#include "rumor/errors.hpp"

namespace rumor {

void fill_uniform(Tensor& t, SeededRng& rng, double range) {
  for (double& v : t.data()) v = rng.uniform(-range, range);
}

namespace {
std::size_t checked_dim(std::size_t dim) {
  if (dim == 0) throw ConfigError("user embedding width must be positive");
  return dim;
}
}  // namespace

UserTable::UserTable(std::size_t dim) : matrix_(Shape{1, checked_dim(dim)}) {
  matrix_.set_requires_grad(true);
}

UserTable UserTable::init(std::span<const std::string> user_ids, std::size_t dim, SeededRng& rng) {
  UserTable table(dim);
  std::vector<double> values(table.matrix_.data().begin(), table.matrix_.data().end());
  for (const auto& id : user_ids) {
    if (table.contains(id)) throw ConfigError("duplicate user id \"" + id + "\"");
    table.append(id, rng, values);
  }
  table.matrix_ = Tensor({table.ids_.size() + 1, dim}, std::move(values));
  table.matrix_.set_requires_grad(true);
  return table;
}

void UserTable::add_users(std::span<const std::string> user_ids, SeededRng& rng) {
  const bool trainable = this->trainable();
  std::vector<double> values(matrix_.data().begin(), matrix_.data().end());
  for (const auto& id : user_ids)
    if (!contains(id)) append(id, rng, values);
  matrix_ = Tensor({ids_.size() + 1, dim()}, std::move(values));
  matrix_.set_requires_grad(trainable);
}

void UserTable::append(const std::string& id, SeededRng& rng, std::vector<double>& values) {
  if (id.empty()) throw ConfigError("the empty user id is reserved for the null author");
  ids_.push_back(id);
  rows_.emplace(id, ids_.size());
  for (std::size_t d = 0; d < dim(); ++d) values.push_back(rng.uniform(-kInitRange, kInitRange));
}

bool UserTable::contains(std::string_view user_id) const { return rows_.contains(std::string(user_id)); }

std::size_t UserTable::row_of(std::string_view user_id) const {
  auto it = rows_.find(std::string(user_id));
  return it == rows_.end() ? 0 : it->second;
}

std::span<const double> UserTable::lookup(std::string_view user_id) const {
  return matrix_.data().subspan(row_of(user_id) * dim(), dim());
}

void write_user_table(std::ostream& out, const UserTable& table) {
  nlohmann::ordered_json header;
  header["N"] = table.user_count();
  header["D"] = table.dim();
  header["user_ids"] = table.user_ids();
  binary::write_header(out, "USRTBL01", header.dump());
  binary::write_doubles(out, table.matrix().data().subspan(table.dim()));
}

UserTable read_user_table(std::istream& in) {
  binary::Reader reader(in);
  reader.expect_magic("USRTBL01", "user-table");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(reader.header());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("corrupt user-table header: ") + e.what());
  }
  std::size_t n = 0, d = 0;
  std::vector<std::string> ids;
  try {
    n = header.at("N").get<std::size_t>();
    d = header.at("D").get<std::size_t>();
    ids = header.at("user_ids").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("corrupt user-table header: ") + e.what());
  }
  if (ids.size() != n || d == 0) throw FormatError("corrupt user-table header: inconsistent N, D or user_ids");

  // Build with placeholder values, then overwrite every row from the payload.
  SeededRng unused(0);
  UserTable table = UserTable::init(ids, d, unused);
  reader.doubles(table.matrix().data().subspan(d));
  reader.expect_end();
  return table;
}

void save_user_table(const UserTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write user table " + path.string());
  write_user_table(out, table);
  if (!out) throw IoError("failed writing user table " + path.string());
}

UserTable load_user_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open user table " + path.string());
  return read_user_table(in);
}

namespace {

double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }
double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

// Cumulative unigram^(3/4) weights over vocabulary indices.
class NoiseSampler {
 public:
  NoiseSampler(std::span<const UserHistory> histories, std::size_t vocab_size) : cumulative_(vocab_size, 0.0) {
    std::vector<double> counts(vocab_size, 0.0);
    for (const auto& h : histories)
      for (const auto& doc : h.documents)
        for (std::size_t w : doc) counts.at(w) += 1.0;
    double total = 0.0;
    for (std::size_t i = 0; i < vocab_size; ++i) {
      total += std::pow(counts[i], 0.75);
      cumulative_[i] = total;
    }
  }

  double mass(std::size_t w) const { return cumulative_[w] - (w == 0 ? 0.0 : cumulative_[w - 1]); }

  // Draws from the noise distribution with `exclude` removed; returns false if nothing else has mass.
  bool draw_other(SeededRng& rng, std::size_t exclude, std::size_t& out) const {
    if (cumulative_.back() - mass(exclude) <= 0.0) return false;
    do out = draw(rng);
    while (out == exclude);
    return true;
  }

 private:
  std::size_t draw(SeededRng& rng) const {
    const double x = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
  }

  std::vector<double> cumulative_;
};

}  // namespace

PretrainReport pretrain_users(UserTable& table, std::span<const UserHistory> histories, Tensor& word_vecs,
                              const PretrainOptions& options, SeededRng& rng) {
  const std::size_t D = table.dim();
  if (word_vecs.rank() != 2 || word_vecs.dim(1) != D) {
    throw DimensionError("word vectors " + shape_to_string(word_vecs.shape()) + " do not match user width " +
                         std::to_string(D));
  }
  const std::size_t V = word_vecs.dim(0);
  PretrainReport report;
  std::vector<std::size_t> active;
  for (std::size_t h = 0; h < histories.size(); ++h) {
    if (!table.contains(histories[h].user_id)) {
      throw ConfigError("user \"" + histories[h].user_id + "\" is not in the user table");
    }
    for (const auto& doc : histories[h].documents)
      for (std::size_t w : doc)
        if (w >= V) throw DimensionError("history token index " + std::to_string(w) + " outside the vocabulary");
    const bool empty = std::all_of(histories[h].documents.begin(), histories[h].documents.end(),
                                   [](const auto& doc) { return doc.empty(); });
    if (empty) report.skipped_users.push_back(histories[h].user_id);
    else active.push_back(h);
  }
  if (active.empty() || options.epochs == 0) return report;

  NoiseSampler noise(histories, V);
  Tensor& users = table.matrix();
  AdadeltaState user_state(users, options.rho, options.eps);
  AdadeltaState word_state(word_vecs, options.rho, options.eps);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(active));
    double total_loss = 0.0;
    std::size_t pairs = 0;
    for (std::size_t h : active) {
      const std::size_t row = table.row_of(histories[h].user_id);
      const double* u = users.data().data() + row * D;
      auto gu = users.grad().subspan(row * D, D);
      auto gv = word_vecs.grad();
      auto V_data = word_vecs.data();

      auto score_pair = [&](std::size_t w, double sign) {
        double s = 0.0;
        for (std::size_t d = 0; d < D; ++d) s += u[d] * V_data[w * D + d];
        total_loss -= log_sigmoid(sign * s);
        // d/ds of -log s(sign*s) = -sign * (1 - s(sign*s))
        const double coeff = -sign * (1.0 - sigmoid(sign * s));
        for (std::size_t d = 0; d < D; ++d) {
          gu[d] += coeff * V_data[w * D + d];
          gv[w * D + d] += coeff * u[d];
        }
      };

      for (const auto& doc : histories[h].documents)
        for (std::size_t w : doc) {
          score_pair(w, +1.0);
          for (std::size_t j = 0; j < options.negatives; ++j) {
            std::size_t n = 0;
            if (noise.draw_other(rng, w, n)) score_pair(n, -1.0);
          }
          ++pairs;
        }
      adadelta_step(users, user_state);
      adadelta_step(word_vecs, word_state);
    }
    report.epoch_loss.push_back(total_loss / static_cast<double>(pairs));
  }
  return report;
}

}  // namespace rumor

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rumor/rng.hpp"
#include "rumor/tensor.hpp"

namespace rumor {

inline constexpr double kInitRange = 0.08;

/// Fills t uniformly in [-range, range].
void fill_uniform(Tensor& t, SeededRng& rng, double range = kInitRange);

/// Author embedding matrix U of shape [N+1, D]. Row 0 is the null author:
/// unknown ids and padded tweet rows resolve to it, it reads as zeros and it
/// is never updated.
class UserTable {
 public:
  explicit UserTable(std::size_t dim = 1);

  /// Rows 1..N drawn uniformly from [-0.08, 0.08] in the order given.
  static UserTable init(std::span<const std::string> user_ids, std::size_t dim, SeededRng& rng);

  /// Appends randomly initialized rows for ids not already present.
  void add_users(std::span<const std::string> user_ids, SeededRng& rng);

  std::size_t dim() const { return matrix_.dim(1); }
  std::size_t user_count() const { return ids_.size(); }
  const std::vector<std::string>& user_ids() const { return ids_; }

  bool contains(std::string_view user_id) const;
  /// Row of a user id; 0 for unknown ids and the null author.
  std::size_t row_of(std::string_view user_id) const;
  /// View of the row that row_of() selects.
  std::span<const double> lookup(std::string_view user_id) const;

  const Tensor& matrix() const { return matrix_; }
  Tensor& matrix() { return matrix_; }

  bool trainable() const { return matrix_.requires_grad(); }
  void set_trainable(bool on) { matrix_.set_requires_grad(on); }

 private:
  void append(const std::string& id, SeededRng& rng, std::vector<double>& values);

  std::vector<std::string> ids_;  // row i+1 belongs to ids_[i]
  std::unordered_map<std::string, std::size_t> rows_;
  Tensor matrix_;
};

/// Binary file: "USRTBL01", u64 header length, JSON header
/// {"N": .., "D": .., "user_ids": [..]}, then N*D little-endian float64
/// (rows 1..N, row-major; the null row is implicit).
void save_user_table(const UserTable& table, const std::filesystem::path& path);
UserTable load_user_table(const std::filesystem::path& path);
void write_user_table(std::ostream& out, const UserTable& table);
UserTable read_user_table(std::istream& in);

struct UserHistory {
  std::string user_id;
  std::vector<std::vector<std::size_t>> documents;  // vocabulary indices
};

struct PretrainOptions {
  std::size_t epochs = 5;
  std::size_t negatives = 5;
  double rho = 0.95;
  double eps = 1e-6;
};

struct PretrainReport {
  std::vector<double> epoch_loss;  // mean loss per (user, word) pair
  std::vector<std::string> skipped_users;  // empty histories
};

/// Fits user rows so that u . v_w is high for words the user wrote and low
/// for negatives drawn from the unigram^(3/4) distribution (redrawn when they
/// hit the positive word):
///   loss(u, w) = -log s(u . v_w) - sum_j log s(-u . v_nj).
/// Word vectors [|V|, D] are co-trained. One Adadelta step per user per epoch
/// over the summed gradient of that user's pairs.
PretrainReport pretrain_users(UserTable& table, std::span<const UserHistory> histories, Tensor& word_vecs,
                              const PretrainOptions& options, SeededRng& rng);

}  // namespace rumor

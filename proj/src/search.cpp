#include "qfold/search.hpp"

#include "qfold/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

namespace qfold::search {

namespace {

struct PairTable {
    int n = 0;
    std::vector<double> first;   // level-1 contact energy
    std::vector<double> second;  // scaled level-2 energy, 0 when nn_level = 1

    double e1(int i, int j) const { return first[static_cast<std::size_t>(i * n + j)]; }
    double e2(int i, int j) const { return second[static_cast<std::size_t>(i * n + j)]; }
};

PairTable pair_table(const std::string& peptide, const SearchConfig& cfg) {
    if (cfg.nn_level != 1 && cfg.nn_level != 2)
        throw Error(ErrorCode::InvalidArgument, "nn_level must be 1 or 2");
    const double f2 = cfg.nn_level == 2 ? scoring::nn_scaling(cfg.lattice, 2).factor : 0.0;
    PairTable t;
    t.n = static_cast<int>(peptide.size());
    t.first.resize(static_cast<std::size_t>(t.n * t.n));
    t.second.resize(t.first.size());
    for (int i = 0; i < t.n; ++i) {
        for (int j = 0; j < t.n; ++j) {
            const double e = cfg.matrix.at(peptide[static_cast<std::size_t>(i)], peptide[static_cast<std::size_t>(j)]);
            t.first[static_cast<std::size_t>(i * t.n + j)] = e;
            t.second[static_cast<std::size_t>(i * t.n + j)] = e * f2;
        }
    }
    return t;
}

// Contribution of one pair (i < j) given the raw integer squared distance.
inline double pair_term(LatticeKind lattice, const PairTable& t, int i, int j, int raw_d2, double penalty,
                        int& collisions) {
    const int sep = j - i;
    if (lattice == LatticeKind::FCC) {
        if (sep < 2) return 0.0;
        if (raw_d2 == 0) {
            ++collisions;
            return penalty;
        }
        if (raw_d2 == 2) return t.e1(i, j);
        if (raw_d2 == 4) return t.e2(i, j);
        return 0.0;
    }
    if (sep < 2) return 0.0;
    const int d4 = (raw_d2 + (sep % 2)) / 4;
    if (d4 == 0) {
        ++collisions;
        return penalty;
    }
    if (sep < 5) return 0.0;
    if (d4 == 1 && sep % 2 == 1) return t.e1(i, j);
    if (d4 == 2) return t.e2(i, j);
    return 0.0;
}

Vec3 step_of(LatticeKind lattice, int k, TurnLabel label) {
    if (lattice == LatticeKind::FCC) return lattice::kFccTurns[static_cast<std::size_t>(label)].displacement;
    return lattice::kTetDirections[static_cast<std::size_t>(label)] * (k % 2 == 0 ? 1 : -1);
}

std::string tet_digits(const TurnSequence& seq) {
    std::string s;
    for (TurnLabel t : seq.turns) s.push_back(static_cast<char>('0' + t));
    return s;
}

int first_free_turn(LatticeKind lattice) { return lattice == LatticeKind::FCC ? 1 : 2; }

// Labels admissible at turn k after label prev.
int options(LatticeKind lattice, int k, TurnLabel prev, std::array<TurnLabel, 12>& out) {
    if (lattice == LatticeKind::FCC) {
        if (k == 1) {
            std::copy(lattice::kSecondTurnLabels.begin(), lattice::kSecondTurnLabels.end(), out.begin());
            return 4;
        }
        int c = 0;
        for (TurnLabel a = 0; a < lattice::kFccTurnCount; ++a)
            if (a != lattice::fcc_inverse(prev)) out[static_cast<std::size_t>(c++)] = a;
        return c;
    }
    for (int rel = 0; rel < 3; ++rel) out[static_cast<std::size_t>(rel)] = (rel + prev + 1) % 4;
    return 3;
}

struct Shared {
    LatticeKind lattice;
    int n_beads;
    PairTable pairs;
    const SearchConfig* cfg;
    std::chrono::steady_clock::time_point start;
    std::atomic<bool> stop{false};
};

class Walker {
public:
    Walker(Shared& shared)
        : s_(shared),
          top_(shared.cfg->k),
          pos_(static_cast<std::size_t>(shared.n_beads)),
          turns_(static_cast<std::size_t>(shared.n_beads - 1)),
          energy_(static_cast<std::size_t>(shared.n_beads), 0.0),
          coll_(static_cast<std::size_t>(shared.n_beads), 0) {
        place(0, 0);
        if (s_.lattice == LatticeKind::TET) place(1, 1);
    }

    void run_prefix(const std::vector<TurnLabel>& prefix) {
        const int f0 = first_free_turn(s_.lattice);
        for (std::size_t i = 0; i < prefix.size(); ++i) place(f0 + static_cast<int>(i), prefix[i]);
        dfs(f0 + static_cast<int>(prefix.size()));
    }

    TopK& top() { return top_; }
    std::uint64_t visited() const { return visited_; }
    std::uint64_t collided() const { return collided_; }

private:
    void place(int k, TurnLabel label) {
        turns_[static_cast<std::size_t>(k)] = label;
        const int bead = k + 1;
        pos_[static_cast<std::size_t>(bead)] = pos_[static_cast<std::size_t>(k)] + step_of(s_.lattice, k, label);
        double e = energy_[static_cast<std::size_t>(k)];
        int c = coll_[static_cast<std::size_t>(k)];
        const Vec3 p = pos_[static_cast<std::size_t>(bead)];
        for (int i = 0; i < bead; ++i) {
            const int d2 = (p - pos_[static_cast<std::size_t>(i)]).norm2();
            e += pair_term(s_.lattice, s_.pairs, i, bead, d2, s_.cfg->collision_penalty, c);
        }
        energy_[static_cast<std::size_t>(bead)] = e;
        coll_[static_cast<std::size_t>(bead)] = c;
    }

    void dfs(int k) {
        if (k == s_.n_beads - 1) {
            leaf();
            return;
        }
        std::array<TurnLabel, 12> opts{};
        const int count = options(s_.lattice, k, turns_[static_cast<std::size_t>(k - 1)], opts);
        for (int i = 0; i < count; ++i) {
            place(k, opts[static_cast<std::size_t>(i)]);
            dfs(k + 1);
        }
    }

    void leaf() {
        ++visited_;
        if ((visited_ & 0xFFFF) == 0) check_budget();
        const std::size_t last = static_cast<std::size_t>(s_.n_beads - 1);
        if (coll_[last] > 0) {
            ++collided_;
            return;
        }
        if (!top_.admits(energy_[last], turns_)) return;
        ConformerRecord rec;
        rec.energy = energy_[last];
        rec.turns = {s_.lattice, turns_};
        rec.coords = {s_.lattice, pos_};
        rec.bits = s_.lattice == LatticeKind::FCC ? lattice::pack_configuration(rec.turns) : tet_digits(rec.turns);
        top_.insert(std::move(rec));
    }

    void check_budget() {
        if (s_.stop.load(std::memory_order_relaxed))
            throw Error(ErrorCode::BudgetExceeded, "search stopped");
        if (s_.cfg->time_limit_s > 0.0) {
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - s_.start;
            if (dt.count() > s_.cfg->time_limit_s) {
                s_.stop = true;
                throw Error(ErrorCode::BudgetExceeded, "search exceeded " + std::to_string(s_.cfg->time_limit_s) + " s");
            }
        }
    }

    Shared& s_;
    TopK top_;
    std::vector<Vec3> pos_;
    std::vector<TurnLabel> turns_;
    std::vector<double> energy_;
    std::vector<int> coll_;
    std::uint64_t visited_ = 0;
    std::uint64_t collided_ = 0;
};

std::vector<std::vector<TurnLabel>> prefixes(LatticeKind lattice, int n_beads, int depth) {
    std::vector<std::vector<TurnLabel>> out{{}};
    const int f0 = first_free_turn(lattice);
    const TurnLabel fixed_prev = lattice == LatticeKind::FCC ? 0 : 1;
    for (int d = 0; d < depth; ++d) {
        std::vector<std::vector<TurnLabel>> next;
        for (const auto& p : out) {
            std::array<TurnLabel, 12> opts{};
            const int count = options(lattice, f0 + d, p.empty() ? fixed_prev : p.back(), opts);
            for (int i = 0; i < count; ++i) {
                next.push_back(p);
                next.back().push_back(opts[static_cast<std::size_t>(i)]);
            }
        }
        out = std::move(next);
    }
    (void)n_beads;
    return out;
}

}  // namespace

bool record_less(const ConformerRecord& a, const ConformerRecord& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.turns.turns < b.turns.turns;
}

TopK::TopK(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw Error(ErrorCode::InvalidArgument, "top-K capacity must be at least 1");
}

bool TopK::admits(double energy, const std::vector<TurnLabel>& turns) const {
    if (static_cast<int>(records_.size()) < capacity_) return true;
    const auto& worst = records_.back();
    if (energy != worst.energy) return energy < worst.energy;
    return turns < worst.turns.turns;
}

void TopK::insert(ConformerRecord record) {
    if (!admits(record.energy, record.turns.turns)) return;
    const auto at = std::upper_bound(records_.begin(), records_.end(), record, record_less);
    records_.insert(at, std::move(record));
    if (static_cast<int>(records_.size()) > capacity_) records_.pop_back();
}

void TopK::merge(const TopK& other) {
    for (const auto& r : other.records()) insert(r);
}

boost::multiprecision::cpp_int enumeration_size(LatticeKind lattice, int n_beads) {
    if (n_beads < 3) throw Error(ErrorCode::InvalidArgument, "need at least 3 beads");
    using boost::multiprecision::cpp_int;
    if (lattice == LatticeKind::FCC) return cpp_int(4) * boost::multiprecision::pow(cpp_int(11), n_beads - 3);
    return boost::multiprecision::pow(cpp_int(3), n_beads - 3);
}

double conformation_energy(const Conformation& conf, const std::string& peptide, const SearchConfig& config) {
    if (conf.size() != peptide.size())
        throw Error(ErrorCode::LengthMismatch, "conformation has " + std::to_string(conf.size()) + " beads, peptide " +
                                                   std::to_string(peptide.size()));
    const PairTable t = pair_table(peptide, config);
    double e = 0.0;
    int collisions = 0;
    for (int j = 1; j < static_cast<int>(conf.size()); ++j)
        for (int i = 0; i < j; ++i)
            e += pair_term(conf.lattice, t, i, j, lattice::pair_squared_distance(conf, i, j), config.collision_penalty,
                           collisions);
    return e;
}

int collision_count(const Conformation& conf) {
    int c = 0;
    for (int j = 1; j < static_cast<int>(conf.size()); ++j)
        for (int i = 0; i + 1 < j; ++i)
            if (lattice::lattice_squared_distance(conf, i, j) == 0) ++c;
    return c;
}

ConformerRecord make_record(const TurnSequence& seq, const std::string& peptide, const SearchConfig& config) {
    ConformerRecord rec;
    rec.turns = seq;
    rec.coords = lattice::coords_from_turns(seq);
    rec.energy = conformation_energy(rec.coords, peptide, config);
    rec.bits = seq.lattice == LatticeKind::FCC ? lattice::pack_configuration(seq) : tet_digits(seq);
    return rec;
}

SearchResult search(const SearchConfig& config) {
    const int n = static_cast<int>(config.peptide.size());
    if (n < 3) throw Error(ErrorCode::InvalidArgument, "search needs at least 3 beads");
    if (!(config.collision_penalty > 0.0)) throw Error(ErrorCode::InvalidArgument, "collision penalty must be positive");
    if (config.workers < 1) throw Error(ErrorCode::InvalidArgument, "workers must be at least 1");
    const auto total = enumeration_size(config.lattice, n);
    if (config.max_sequences > 0 && total > config.max_sequences)
        throw Error(ErrorCode::BudgetExceeded, "search space of " + total.str() + " sequences exceeds the budget");

    Shared shared{config.lattice, n, pair_table(config.peptide, config), &config, std::chrono::steady_clock::now()};
    const int free_turns = n - 1 - first_free_turn(config.lattice);
    const auto units = prefixes(config.lattice, n, std::min(free_turns, 2));
    const int workers = std::min<int>(config.workers, static_cast<int>(units.size()));

    std::vector<Walker> walkers;
    walkers.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) walkers.emplace_back(shared);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));

    auto job = [&](int w) {
        const std::size_t lo = units.size() * static_cast<std::size_t>(w) / static_cast<std::size_t>(workers);
        const std::size_t hi = units.size() * static_cast<std::size_t>(w + 1) / static_cast<std::size_t>(workers);
        try {
            for (std::size_t u = lo; u < hi; ++u) walkers[static_cast<std::size_t>(w)].run_prefix(units[u]);
        } catch (...) {
            shared.stop = true;
            errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
    };
    if (workers == 1) {
        job(0);
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; ++w) threads.emplace_back(job, w);
        for (auto& t : threads) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    SearchResult result{TopK(config.k)};
    for (auto& w : walkers) {
        result.top.merge(w.top());
        result.visited += w.visited();
        result.collided += w.collided();
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - shared.start;
    result.seconds = dt.count();
    return result;
}

}  // namespace qfold::search

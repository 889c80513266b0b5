#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "qsdlab/expr.hpp"
#include "qsdlab/generator.hpp"

namespace qsdlab {

/// Rate sequence k >= 1 given as a constant, a closed-form expression over k,
/// or an explicit table. Keeps its source representation for serialization.
class RateSequence {
public:
    RateSequence() : repr_(0.0) {}
    RateSequence(double constant) : repr_(constant) {}  // NOLINT: implicit by design
    static RateSequence expression(const std::string& source) { return RateSequence(Expr::parse(source)); }
    static RateSequence table(std::vector<double> values) { return RateSequence(std::move(values)); }

    double operator()(long long k) const;

    bool is_constant() const { return std::holds_alternative<double>(repr_); }
    bool is_expression() const { return std::holds_alternative<Expr>(repr_); }
    bool is_table() const { return std::holds_alternative<std::vector<double>>(repr_); }
    double constant() const { return std::get<double>(repr_); }
    const Expr& expr() const { return std::get<Expr>(repr_); }
    const std::vector<double>& values() const { return std::get<std::vector<double>>(repr_); }

private:
    explicit RateSequence(Expr e) : repr_(std::move(e)) {}
    explicit RateSequence(std::vector<double> v) : repr_(std::move(v)) {}
    std::variant<double, Expr, std::vector<double>> repr_;
};

/// 1-D birth-death chain on {1..N} with catastrophes: from k, birth b_k to
/// k+1 (dropped at the truncation cap), death d_k to k-1 (into the cemetery
/// at k=1) and catastrophe a_k straight to the cemetery.
struct BDSpec {
    RateSequence b;
    RateSequence d;
    RateSequence a = RateSequence(0.0);
    int N = 0;
};

AbsorbedGenerator build_bd(const BDSpec& spec);

enum class MultiBDMode { Mutation, Cooperative };

/// Multi-type birth-death process truncated to a box. Mutation mode: birth of
/// type i at rate sum_j lambda(j,i) x_j, death mu_i x_i + sum_j c(i,j) x_i x_j,
/// absorbed only at total extinction. Cooperative mode: birth
/// lambda_i x_i + sum_{j!=i} c(i,j) x_i x_j, death mu_i x_i + c(i,i) x_i^2,
/// absorbed as soon as any coordinate hits zero.
struct MultiBDSpec {
    MultiBDMode mode = MultiBDMode::Mutation;
    int d = 0;
    Matrix lambda_matrix;  // mutation mode, d x d
    Vector lambda_vec;     // cooperative mode, length d
    Vector mu;             // length d
    Matrix c;              // d x d interaction
    int cap = 0;
    long long state_budget = 200000;
};

struct MultiBDGenerator {
    AbsorbedGenerator gen;
    std::vector<std::vector<int>> states;  // state id -> coordinates
};

MultiBDGenerator build_multibd_mutation(const MultiBDSpec& spec);
MultiBDGenerator build_multibd_cooperative(const MultiBDSpec& spec);

struct WeakCooperationCheck {
    bool holds = false;
    double margin = 0.0;  // 1/beta - (1 - 1/d) max_{i!=j} (c_ij + c_ji)/2
};

WeakCooperationCheck check_weak_cooperation(const MultiBDSpec& spec);

/// Dominating 1-D birth/death rates coupling the multi-type process with a
/// scalar chain in total population size; suitable as s_series input.
struct DominationRates {
    std::function<double(long long)> b;
    std::function<double(long long)> d;
};

DominationRates domination_rates(const MultiBDSpec& spec);

}  // namespace qsdlab

#include "mfrm/splitmerge.hpp"

#include <cmath>
#include <exception>
#include <limits>

#include "mfrm/errors.hpp"
#include "mfrm/ppmx.hpp"
#include "mfrm/randdist.hpp"
#include "mfrm/weights.hpp"

namespace mfrm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double log_iso_normal(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, double var) {
    return -0.5 * x.size() * (kLog2Pi + std::log(var)) - 0.5 * (x - mean).squaredNorm() / var;
}

// -sum of pair terms over pairs with at least one member in labels
double log_h_touching(const RepulsionSpec& spec, const ChainState& s, int d, const int labels[2]) {
    if (spec.phi(d) == 0.0) return 0.0;
    double out = 0.0;
    const int J = s.J();
    auto touched = [&](int j) { return j == labels[0] || j == labels[1]; };
    for (int a = 0; a < J; ++a)
        for (int b = a + 1; b < J; ++b) {
            if (!touched(a) && !touched(b)) continue;
            double dist = curve_distance(spec, s.theta[a].col(d), s.theta[b].col(d));
            double x = std::max(dist, spec.floor);
            out -= spec.phi(d) * (spec.nu == 2.0 ? 1.0 / (x * x) : std::pow(x, -spec.nu));
        }
    return out;
}

std::vector<int> block_members(const ChainState& s, int label) {
    std::vector<int> out;
    for (int i = 0; i < s.m(); ++i)
        if (s.z[i] == label) out.push_back(i);
    return out;
}

double log_block_prior(const Model& model, const std::vector<int>& members) {
    if (members.empty()) return 0.0;
    return log_cohesion(static_cast<int>(members.size()), model.hp().cohesion_M) + log_similarity(model, members);
}

SplitMergeTerms ratio_terms(const Model& model, const ChainState& cur, const ChainState& prop,
                            const std::vector<int>& members, const int labels[2],
                            const Eigen::MatrixXd& lw, const RepulsionSpec& spec) {
    SplitMergeTerms t;
    const int D = model.D();
    const int nl = labels[0] == labels[1] ? 1 : 2;
    if (model.ppmx()) {
        for (int k = 0; k < nl; ++k) {
            t.log_prior_ratio += log_block_prior(model, block_members(prop, labels[k])) -
                                 log_block_prior(model, block_members(cur, labels[k]));
        }
    } else {
        for (int i : members) t.log_prior_ratio += lw(i, prop.z[i]) - lw(i, cur.z[i]);
    }
    auto cnt_cur = cur.counts(), cnt_prop = prop.counts();
    for (int k = 0; k < nl; ++k) {
        const int l = labels[k];
        for (int d = 0; d < D; ++d) {
            if (!model.ppmx() || cnt_prop[l] > 0)
                t.log_prior_ratio += log_component_prior(model, prop, prop.theta[l].col(d), prop.tau2(l, d), prop.lam2(l, d), d);
            if (!model.ppmx() || cnt_cur[l] > 0)
                t.log_prior_ratio -= log_component_prior(model, cur, cur.theta[l].col(d), cur.tau2(l, d), cur.lam2(l, d), d);
        }
    }
    if (model.repulsive()) {
        for (int d = 0; d < D; ++d)
            t.log_prior_ratio += log_h_touching(spec, prop, d, labels) - log_h_touching(spec, cur, d, labels);
    }
    for (int i : members)
        for (int d = 0; d < D; ++d) {
            t.log_lik_ratio += log_iso_normal(cur.B[i].col(d), prop.theta[prop.z[i]].col(d), prop.lam2(prop.z[i], d)) -
                               log_iso_normal(cur.B[i].col(d), cur.theta[cur.z[i]].col(d), cur.lam2(cur.z[i], d));
        }
    return t;
}

// tau^2, then theta | tau^2, then lambda^2 from their priors; returns the log density
double draw_component_prior(const Model& model, const ChainState& s, Eigen::MatrixXd& theta,
                            Eigen::RowVectorXd& tau2, Eigen::RowVectorXd& lam2, Rng& rng) {
    const auto& hp = model.hp();
    const int p = model.p(), D = model.D();
    theta.resize(p, D);
    tau2.resize(D);
    lam2.resize(D);
    double lq = 0.0;
    for (int d = 0; d < D; ++d) {
        tau2(d) = sample_inv_gamma(hp.a_tau, s.b_tau, rng);
        Eigen::VectorXd zv = rng.normal_vector(p);
        theta.col(d) = s.mu.col(d) + std::sqrt(tau2(d)) * model.K_chol_upper().triangularView<Eigen::Upper>().solve(zv);
        double a = hp.A(d) * rng.uniform();
        lam2(d) = a * a;
        lq += log_component_prior(model, s, theta.col(d), tau2(d), lam2(d), d);
    }
    return lq;
}

void init_launch_params(const Model& model, const ChainState& s, LaunchState& L, bool from_prior, Rng& rng) {
    const int D = model.D();
    L.tau2.resize(2, D);
    L.lam2.resize(2, D);
    for (int k = 0; k < 2; ++k) {
        if (!L.two && k == 0) {
            L.theta[0] = Eigen::MatrixXd::Zero(model.p(), D);
            L.tau2.row(0).setOnes();
            L.lam2.row(0).setOnes();
            continue;
        }
        if (from_prior) {
            Eigen::RowVectorXd t2, l2;
            draw_component_prior(model, s, L.theta[k], t2, l2, rng);
            L.tau2.row(k) = t2;
            L.lam2.row(k) = l2;
        } else {
            const int l = L.labels[k];
            L.theta[k] = s.theta[l];
            L.tau2.row(k) = s.tau2.row(l);
            L.lam2.row(k) = s.lam2.row(l);
        }
    }
}

}  // namespace

const char* move_kind_name(MoveRecord::Kind k) {
    switch (k) {
        case MoveRecord::Kind::Split: return "split";
        case MoveRecord::Kind::Merge: return "merge";
        case MoveRecord::Kind::Skipped: return "skipped";
        case MoveRecord::Kind::Failed: return "failed";
    }
    return "?";
}

double restricted_scan(const ScanContext& ctx, LaunchState& L, Rng& rng, const LaunchState* target, bool density) {
    const Model& model = *ctx.model;
    const ChainState& s = *ctx.state;
    const auto& hp = model.hp();
    const int p = model.p(), D = model.D();
    const Eigen::MatrixXd& K = model.K();
    const int first = L.two ? 0 : 1;
    double lq = 0.0;

    std::vector<int> size(2, 0);
    for (int sd : L.side) ++size[sd];

    // theta
    Eigen::MatrixXd prec(p, p);
    Eigen::VectorXd lin(p), mean(p), bsum(p), u(p);
    Eigen::LLT<Eigen::MatrixXd> llt(p);
    for (int k = first; k < 2; ++k) {
        for (int d = 0; d < D; ++d) {
            prec = K / L.tau2(k, d);
            prec.diagonal().array() += size[k] / L.lam2(k, d);
            bsum.setZero();
            for (std::size_t r = 0; r < L.members.size(); ++r)
                if (L.side[r] == k) bsum += s.B[L.members[r]].col(d);
            lin.noalias() = K * s.mu.col(d);
            lin = lin / L.tau2(k, d) + bsum / L.lam2(k, d);
            llt.compute(prec);
            mean = llt.solve(lin);
            if (target) {
                L.theta[k].col(d) = target->theta[k].col(d);
            } else {
                for (int e = 0; e < p; ++e) u(e) = rng.normal();
                llt.matrixU().solveInPlace(u);
                L.theta[k].col(d) = mean + u;
            }
            if (!density) continue;
            u = L.theta[k].col(d) - mean;
            u = llt.matrixU() * u;
            lq += -0.5 * p * kLog2Pi + llt.matrixLLT().diagonal().array().log().sum() - 0.5 * u.squaredNorm();
        }
    }
    // tau^2
    for (int k = first; k < 2; ++k) {
        for (int d = 0; d < D; ++d) {
            Eigen::VectorXd r = L.theta[k].col(d) - s.mu.col(d);
            double a = hp.a_tau + 0.5 * p, b = s.b_tau + 0.5 * r.dot(K * r);
            if (target) L.tau2(k, d) = target->tau2(k, d);
            else L.tau2(k, d) = sample_inv_gamma(a, b, rng);
            if (density) lq += log_inv_gamma_density(L.tau2(k, d), a, b);
        }
    }
    // lambda^2
    for (int k = first; k < 2; ++k) {
        for (int d = 0; d < D; ++d) {
            double ss = 0.0;
            for (std::size_t r = 0; r < L.members.size(); ++r)
                if (L.side[r] == k) ss += (s.B[L.members[r]].col(d) - L.theta[k].col(d)).squaredNorm();
            double a = 0.5 * (size[k] * p - 1.0), b = 0.5 * ss, upper = hp.A(d) * hp.A(d);
            if (target) L.lam2(k, d) = target->lam2(k, d);
            else L.lam2(k, d) = sample_trunc_inv_gamma(a, b, upper, rng);
            if (density) lq += log_trunc_inv_gamma_density(L.lam2(k, d), a, b, upper);
        }
    }
    if (!L.two) return lq;

    // allocations of the non-anchors
    for (std::size_t r = 2; r < L.members.size(); ++r) {
        const int i = L.members[r];
        Eigen::Vector2d lw;
        for (int k = 0; k < 2; ++k) {
            double w;
            if (model.ppmx()) {
                std::vector<int> others;
                for (std::size_t q = 0; q < L.members.size(); ++q)
                    if (q != r && L.side[q] == k) others.push_back(L.members[q]);
                w = log_join_ratio(model, others, i);
            } else {
                w = (*ctx.log_weights)(i, L.labels[k]);
            }
            for (int d = 0; d < D; ++d) w += log_iso_normal(s.B[i].col(d), L.theta[k].col(d), L.lam2(k, d));
            lw(k) = w;
        }
        int pick = target ? target->side[r] : sample_log_weights(lw, rng);
        L.side[r] = pick;
        if (density) lq += lw(pick) - log_sum_exp(lw);
    }
    return lq;
}

SplitMergeTerms split_merge_ratio_terms(const Model& model, const ChainState& current,
                                        const ChainState& proposed, const std::vector<int>& members,
                                        const int labels[2]) {
    Eigen::MatrixXd lw = model.ppmx() ? Eigen::MatrixXd() : log_weight_matrix(model, current);
    return ratio_terms(model, current, proposed, members, labels, lw, RepulsionSpec::from_model(model));
}

MoveRecord split_merge_move(const Model& model, ChainState& s, RepulsionCache& cache,
                            const Eigen::MatrixXd& log_weights, Rng& rng, const SplitMergeOptions& opt) {
    MoveRecord rec;
    const int m = s.m(), J = s.J();
    if (m < 2) return rec;
    rec.i0 = rng.uniform_int(m);
    rec.i1 = rng.uniform_int(m - 1);
    if (rec.i1 >= rec.i0) ++rec.i1;
    const int i0 = rec.i0, i1 = rec.i1;
    const int c0 = s.z[i0], c1 = s.z[i1];
    auto counts = s.counts();
    const bool split = c0 == c1;

    // Mixture splits take a uniformly random empty label; product partitions stay compact.
    std::vector<int> empty;
    for (int j = 0; j < J; ++j)
        if (counts[j] == 0) empty.push_back(j);
    const int n_empty = static_cast<int>(empty.size());
    double log_label_fwd = 0.0, log_label_rev = 0.0;
    int labels[2];
    if (split) {
        if (empty.empty()) return rec;  // no room for a new component
        if (model.ppmx()) {
            labels[0] = empty.front();
        } else {
            labels[0] = empty[rng.uniform_int(n_empty)];
            log_label_fwd = -std::log(static_cast<double>(n_empty));
        }
        labels[1] = c1;
        rec.kind = MoveRecord::Kind::Split;
    } else {
        labels[0] = c0;
        labels[1] = c1;
        rec.kind = MoveRecord::Kind::Merge;
        if (!model.ppmx()) log_label_rev = -std::log(static_cast<double>(n_empty + 1));
    }

    LaunchState split_launch, merge_launch;
    for (LaunchState* L : {&split_launch, &merge_launch}) {
        L->labels[0] = labels[0];
        L->labels[1] = labels[1];
        L->members = {i0, i1};
        for (int i = 0; i < m; ++i)
            if (i != i0 && i != i1 && (s.z[i] == c0 || s.z[i] == c1)) L->members.push_back(i);
    }
    const std::size_t nm = split_launch.members.size();
    split_launch.two = true;
    merge_launch.two = false;
    split_launch.side.assign(nm, 1);
    split_launch.side[0] = 0;
    merge_launch.side.assign(nm, 1);
    for (std::size_t r = 2; r < nm; ++r) {
        if (opt.random_launch) split_launch.side[r] = rng.uniform() < 0.5 ? 0 : 1;
        else split_launch.side[r] = s.z[split_launch.members[r]] == labels[0] && !split ? 0 : 1;
    }

    ScanContext ctx{&model, &s, &log_weights};
    try {
        init_launch_params(model, s, split_launch, opt.random_launch, rng);
        init_launch_params(model, s, merge_launch, opt.random_launch, rng);
        for (int t = 0; t < opt.n_gs; ++t) {
            restricted_scan(ctx, split_launch, rng, nullptr, false);
            restricted_scan(ctx, merge_launch, rng, nullptr, false);
        }

        // current configuration in launch form
        LaunchState cur = split ? merge_launch : split_launch;
        for (int k = 0; k < 2; ++k) {
            cur.theta[k] = s.theta[labels[k]];
            cur.tau2.row(k) = s.tau2.row(labels[k]);
            cur.lam2.row(k) = s.lam2.row(labels[k]);
        }
        for (std::size_t r = 0; r < nm; ++r) cur.side[r] = s.z[cur.members[r]] == labels[0] && !split ? 0 : 1;

        ChainState prop = s;
        double log_q_fwd, log_q_rev;
        if (split) {
            LaunchState fin = split_launch;
            log_q_fwd = restricted_scan(ctx, fin, rng, nullptr);
            LaunchState back = merge_launch;
            log_q_rev = restricted_scan(ctx, back, rng, &cur);
            if (!model.ppmx())
                for (int d = 0; d < model.D(); ++d)
                    log_q_rev += log_component_prior(model, s, s.theta[labels[0]].col(d), s.tau2(labels[0], d),
                                                     s.lam2(labels[0], d), d);
            for (int k = 0; k < 2; ++k) {
                prop.theta[labels[k]] = fin.theta[k];
                prop.tau2.row(labels[k]) = fin.tau2.row(k);
                prop.lam2.row(labels[k]) = fin.lam2.row(k);
            }
            for (std::size_t r = 0; r < nm; ++r) prop.z[fin.members[r]] = labels[fin.side[r]];
        } else {
            LaunchState fin = merge_launch;
            log_q_fwd = restricted_scan(ctx, fin, rng, nullptr);
            prop.theta[labels[1]] = fin.theta[1];
            prop.tau2.row(labels[1]) = fin.tau2.row(1);
            prop.lam2.row(labels[1]) = fin.lam2.row(1);
            if (!model.ppmx()) {
                // the vacated component gets fresh prior draws
                Eigen::MatrixXd th;
                Eigen::RowVectorXd t2(model.D()), l2(model.D());
                log_q_fwd += draw_component_prior(model, s, th, t2, l2, rng);
                prop.theta[labels[0]] = th;
                prop.tau2.row(labels[0]) = t2;
                prop.lam2.row(labels[0]) = l2;
            }
            for (std::size_t r = 0; r < nm; ++r) prop.z[fin.members[r]] = labels[1];
            LaunchState back = split_launch;
            log_q_rev = restricted_scan(ctx, back, rng, &cur);
        }

        auto terms = ratio_terms(model, s, prop, split_launch.members, labels, log_weights, cache.spec());
        log_q_fwd += log_label_fwd;
        log_q_rev += log_label_rev;
        rec.log_ratio = log_q_rev - log_q_fwd + terms.log_prior_ratio + terms.log_lik_ratio;
        if (std::isnan(rec.log_ratio)) throw NumericalError("split-merge ratio is NaN");
        if (std::log(rng.uniform()) < rec.log_ratio) {
            rec.accepted = true;
            s = std::move(prop);
            cache.update_component(s, labels[0]);
            cache.update_component(s, labels[1]);
        }
    } catch (const std::exception&) {
        rec.kind = MoveRecord::Kind::Failed;
        rec.accepted = false;
    }
    return rec;
}

}  // namespace mfrm

#include "mfrm/sampler.hpp"

#include <cmath>
#include <set>

#include "mfrm/errors.hpp"
#include "mfrm/ppmx.hpp"
#include "mfrm/randdist.hpp"
#include "mfrm/weights.hpp"

namespace mfrm {

Eigen::VectorXi PosteriorDraws::n_clusters() const {
    Eigen::VectorXi k(z.rows());
    for (Eigen::Index s = 0; s < z.rows(); ++s) {
        std::set<int> labels;
        for (Eigen::Index i = 0; i < z.cols(); ++i) labels.insert(z(s, i));
        k(s) = static_cast<int>(labels.size());
    }
    return k;
}

Sampler::Sampler(const Model& model, ChainState init, std::uint64_t seed, std::uint64_t stream)
    : model_(model), s_(std::move(init)), rng_(seed, stream) {
    const int D = model_.D();
    scales.occupied = Eigen::VectorXd::Constant(D, 0.1);
    scales.empty = Eigen::VectorXd::Constant(D, 0.5);
    accepted = Eigen::MatrixXd::Zero(2, D);
    proposed = Eigen::MatrixXd::Zero(2, D);
    if (model_.ppmx()) {
        compact_labels(s_);
    }
    cache_ = RepulsionCache(RepulsionSpec::from_model(model_), s_);
    if (model_.ppmx()) cache_ = RepulsionCache();
}

void Sampler::refresh() {
    terms_valid_ = false;
    if (!model_.ppmx()) cache_.rebuild(s_);
}

void Sampler::ensure_terms() {
    if (terms_valid_) return;
    terms_.resize(model_.m());
    for (int i = 0; i < model_.m(); ++i) terms_[i] = make_individual_terms(model_, s_, i);
    terms_valid_ = true;
}

std::vector<std::vector<int>> Sampler::members() const {
    std::vector<std::vector<int>> out(s_.J());
    for (int i = 0; i < s_.m(); ++i) out[s_.z[i]].push_back(i);
    return out;
}

void Sampler::sweep() {
    if (mask.split_merge) step_split_merge();
    if (mask.weights) step_weights();
    if (mask.allocations) step_allocations();
    if (mask.theta) step_theta();
    if (mask.coefficients) step_coefficients();
    if (mask.tau2) step_tau2();
    if (mask.lam2) step_lam2();
    if (mask.mu) step_mu();
    if (mask.beta0) step_beta0();
    if (mask.sigma) step_sigma();
    if (mask.mu0) step_mu0();
    if (mask.sig02) step_sig02();
    if (mask.b_tau) step_b_tau();
    ++iter_;
}

void Sampler::step_split_merge() {
    Eigen::MatrixXd lw = model_.ppmx() ? Eigen::MatrixXd() : log_weight_matrix(model_, s_);
    MoveRecord rec = split_merge_move(model_, s_, cache_, lw, rng_, split_merge);
    rec.iter = iter_;
    if (record_moves) moves.push_back(rec);
}

void Sampler::step_weights() {
    if (model_.ppmx()) return;
    if (model_.use_covariates()) step_stick_breaking(model_, s_, rng_);
    else step_dirichlet_weights(model_, s_, rng_);
}

void Sampler::step_allocations() {
    ensure_terms();
    if (model_.ppmx()) allocations_ppmx();
    else allocations_mixture();
}

void Sampler::allocations_mixture() {
    const int J = s_.J(), m = model_.m();
    Eigen::MatrixXd lw = log_weight_matrix(model_, s_);
    std::vector<std::vector<Eigen::MatrixXd>> rot(model_.n_bases());
    for (int b = 0; b < model_.n_bases(); ++b) {
        rot[b].resize(J);
        for (int j = 0; j < J; ++j) rot[b][j] = model_.basis(b).Q.transpose() * s_.theta[j];
    }
    std::vector<Eigen::VectorXd> lam2(J);
    for (int j = 0; j < J; ++j) lam2[j] = s_.lam2.row(j).transpose();
    Eigen::VectorXd logw(J);
    for (int i = 0; i < m; ++i) {
        const auto& t = terms_[i];
        for (int j = 0; j < J; ++j) {
            double l = lw(i, j);
            logw(j) = std::isfinite(l) ? l + log_marginal_weight(t, rot[t.basis_index][j], lam2[j]) : l;
        }
        if (!logw.allFinite() && !(logw.array() > -std::numeric_limits<double>::infinity()).any())
            throw NumericalError("allocation weights are all zero");
        s_.z[i] = sample_log_weights(logw, rng_);
    }
}

void Sampler::draw_component_prior(int j) {
    const auto& hp = model_.hp();
    const int p = model_.p();
    for (int d = 0; d < model_.D(); ++d) {
        s_.tau2(j, d) = sample_inv_gamma(hp.a_tau, s_.b_tau, rng_);
        Eigen::VectorXd zv = rng_.normal_vector(p);
        s_.theta[j].col(d) = s_.mu.col(d) +
            std::sqrt(s_.tau2(j, d)) * model_.K_chol_upper().triangularView<Eigen::Upper>().solve(zv);
        double a = hp.A(d) * rng_.uniform();
        s_.lam2(j, d) = a * a;
    }
}

void Sampler::allocations_ppmx() {
    const int m = model_.m(), J = s_.J();
    const double logM = std::log(model_.hp().cohesion_M);
    for (int i = 0; i < m; ++i) {
        auto mem = members();
        const int c = s_.z[i];
        auto& own = mem[c];
        own.erase(std::find(own.begin(), own.end(), i));
        int aux;
        if (own.empty()) {
            aux = c;  // a singleton keeps its parameters as the auxiliary candidate
        } else {
            aux = -1;
            for (int j = 0; j < J; ++j)
                if (mem[j].empty()) {
                    aux = j;
                    break;
                }
            draw_component_prior(aux);
        }
        std::vector<int> cand;
        std::vector<double> lwv;
        const auto& t = terms_[i];
        const auto& Q = t.basis->Q;
        for (int j = 0; j < J; ++j) {
            if (j == aux) continue;
            if (mem[j].empty()) continue;
            double w = log_join_ratio(model_, mem[j], i) +
                       log_marginal_weight(t, Q.transpose() * s_.theta[j], s_.lam2.row(j).transpose());
            cand.push_back(j);
            lwv.push_back(w);
        }
        cand.push_back(aux);
        lwv.push_back(logM + log_similarity(model_, {i}) +
                      log_marginal_weight(t, Q.transpose() * s_.theta[aux], s_.lam2.row(aux).transpose()));
        Eigen::VectorXd lw = Eigen::Map<Eigen::VectorXd>(lwv.data(), static_cast<Eigen::Index>(lwv.size()));
        s_.z[i] = cand[sample_log_weights(lw, rng_)];
    }
    compact_labels(s_);
}

void Sampler::step_theta() {
    ensure_terms();
    const int J = s_.J(), D = model_.D(), p = model_.p();
    auto mem = members();
    const bool rep = !model_.ppmx() && cache_.active();
    const auto& U = model_.K_chol_upper();
    for (int j = 0; j < J; ++j) {
        if (model_.ppmx() && mem[j].empty()) continue;
        ThetaSystem sys(p, D, model_.n_bases());
        const Eigen::VectorXd lam2 = s_.lam2.row(j).transpose();
        for (int i : mem[j]) sys.add(terms_[i], lam2);
        Eigen::MatrixXd prec;
        Eigen::VectorXd lin;
        sys.finalize(model_, s_.tau2.row(j).transpose(), s_.mu, lam2, prec, lin);
        if (!rep) {
            Eigen::VectorXd x = sample_mvn_canonical(lin, prec, rng_);
            s_.theta[j] = Eigen::Map<Eigen::MatrixXd>(x.data(), p, D);
            continue;
        }
        Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(s_.theta[j].data(), p * D);
        const int cls = mem[j].empty() ? 1 : 0;
        for (int d = 0; d < D; ++d) {
            const auto Pdd = prec.block(d * p, d * p, p, p);
            // linear term of block d given the other blocks
            Eigen::VectorXd hd = lin.segment(d * p, p) - prec.middleRows(d * p, p) * x + Pdd * x.segment(d * p, p);
            if (model_.hp().phi(d) == 0.0) {
                Eigen::VectorXd nd = sample_mvn_canonical(hd, Pdd, rng_);
                x.segment(d * p, p) = nd;
                s_.theta[j].col(d) = nd;
                continue;
            }
            const double eps = cls == 0 ? scales.occupied(d) : scales.empty(d);
            Eigen::VectorXd cur = x.segment(d * p, p);
            Eigen::VectorXd step = std::sqrt(eps) * U.triangularView<Eigen::Upper>().solve(rng_.normal_vector(p));
            Eigen::VectorXd nd = cur + step;
            double dlog = hd.dot(step) - 0.5 * (nd.dot(Pdd * nd) - cur.dot(Pdd * cur)) + cache_.delta(s_, d, j, nd);
            proposed(cls, d) += 1.0;
            if (std::log(rng_.uniform()) < dlog) {
                accepted(cls, d) += 1.0;
                x.segment(d * p, p) = nd;
                s_.theta[j].col(d) = nd;
                cache_.update_component(s_, j, d);
            }
        }
    }
}

void Sampler::step_coefficients() {
    ensure_terms();
    for (int i = 0; i < model_.m(); ++i) {
        const int j = s_.z[i];
        s_.B[i] = draw_coefficients(terms_[i], s_.theta[j], s_.lam2.row(j).transpose(), rng_);
    }
}

void Sampler::step_tau2() {
    const auto& hp = model_.hp();
    const int p = model_.p();
    auto cnt = s_.counts();
    for (int j = 0; j < s_.J(); ++j) {
        if (model_.ppmx() && cnt[j] == 0) continue;
        for (int d = 0; d < model_.D(); ++d) {
            Eigen::VectorXd r = s_.theta[j].col(d) - s_.mu.col(d);
            s_.tau2(j, d) = sample_inv_gamma(hp.a_tau + 0.5 * p, s_.b_tau + 0.5 * r.dot(model_.K() * r), rng_);
        }
    }
}

void Sampler::step_lam2() {
    const auto& hp = model_.hp();
    const int p = model_.p();
    auto mem = members();
    for (int j = 0; j < s_.J(); ++j) {
        const int nj = static_cast<int>(mem[j].size());
        if (model_.ppmx() && nj == 0) continue;
        for (int d = 0; d < model_.D(); ++d) {
            if (nj == 0) {
                double a = hp.A(d) * rng_.uniform();
                s_.lam2(j, d) = a * a;
                continue;
            }
            double ss = 0.0;
            for (int i : mem[j]) ss += (s_.B[i].col(d) - s_.theta[j].col(d)).squaredNorm();
            s_.lam2(j, d) = sample_trunc_inv_gamma(0.5 * (nj * p - 1.0), 0.5 * ss, hp.A(d) * hp.A(d), rng_);
        }
    }
}

void Sampler::step_b_tau() {
    const auto& hp = model_.hp();
    auto cnt = s_.counts();
    double n = 0.0, sum_inv = 0.0;
    for (int j = 0; j < s_.J(); ++j) {
        if (model_.ppmx() && cnt[j] == 0) continue;
        for (int d = 0; d < model_.D(); ++d) {
            n += 1.0;
            sum_inv += 1.0 / s_.tau2(j, d);
        }
    }
    s_.b_tau = rng_.gamma(hp.xi + n * hp.a_tau, hp.varpi + sum_inv);
}

void Sampler::step_mu() {
    const auto& hp = model_.hp();
    const int p = model_.p();
    auto cnt = s_.counts();
    for (int d = 0; d < model_.D(); ++d) {
        Eigen::MatrixXd P = Eigen::MatrixXd::Identity(p, p) / hp.s_mu2;
        double w = 0.0;
        Eigen::VectorXd th = Eigen::VectorXd::Zero(p);
        for (int j = 0; j < s_.J(); ++j) {
            if (model_.ppmx() && cnt[j] == 0) continue;
            w += 1.0 / s_.tau2(j, d);
            th += s_.theta[j].col(d) / s_.tau2(j, d);
        }
        P += w * model_.K();
        s_.mu.col(d) = sample_mvn_canonical(model_.K() * th, P, rng_);
    }
}

void Sampler::step_beta0() {
    const int D = model_.D();
    for (int i = 0; i < model_.m(); ++i) {
        const auto& Y = model_.data().Y[i];
        const double n = static_cast<double>(Y.rows());
        Eigen::VectorXd esum = (Y - model_.basis_of(i).H * s_.B[i]).colwise().sum().transpose();
        if (model_.independent()) {
            for (int d = 0; d < D; ++d) {
                double s2 = s_.Sigma[i](d, d);
                double prec = n / s2 + 1.0 / s_.sig02(d);
                double mean = (esum(d) / s2 + s_.mu0(d) / s_.sig02(d)) / prec;
                s_.beta0(i, d) = mean + rng_.normal() / std::sqrt(prec);
            }
        } else {
            Eigen::LLT<Eigen::MatrixXd> llt(s_.Sigma[i]);
            Eigen::MatrixXd P = n * llt.solve(Eigen::MatrixXd::Identity(D, D));
            P.diagonal() += s_.sig02.cwiseInverse();
            Eigen::VectorXd h = llt.solve(esum) + s_.mu0.cwiseQuotient(s_.sig02);
            s_.beta0.row(i) = sample_mvn_canonical(h, P, rng_).transpose();
        }
    }
    terms_valid_ = false;
}

void Sampler::step_sigma() {
    const auto& hp = model_.hp();
    const int D = model_.D();
    for (int i = 0; i < model_.m(); ++i) {
        const auto& Y = model_.data().Y[i];
        Eigen::MatrixXd E = Y - model_.basis_of(i).H * s_.B[i];
        E.rowwise() -= s_.beta0.row(i);
        if (model_.independent()) {
            Eigen::MatrixXd S = Eigen::MatrixXd::Zero(D, D);
            for (int d = 0; d < D; ++d)
                S(d, d) = sample_inv_gamma(hp.a_sigma + 0.5 * Y.rows(), hp.b_sigma + 0.5 * E.col(d).squaredNorm(), rng_);
            s_.Sigma[i] = S;
        } else {
            s_.Sigma[i] = sample_inv_wishart(hp.omega + Y.rows(), E.transpose() * E + hp.Sigma0, rng_);
        }
    }
    terms_valid_ = false;
}

void Sampler::step_mu0() {
    const double s0 = model_.hp().s02, m = model_.m();
    for (int d = 0; d < model_.D(); ++d) {
        double v = s_.sig02(d);
        double denom = m * s0 + v;
        double mean = s0 * s_.beta0.col(d).sum() / denom;
        s_.mu0(d) = mean + rng_.normal() * std::sqrt(s0 * v / denom);
    }
}

void Sampler::step_sig02() {
    const auto& hp = model_.hp();
    for (int d = 0; d < model_.D(); ++d) {
        double ss = (s_.beta0.col(d).array() - s_.mu0(d)).square().sum();
        s_.sig02(d) = sample_inv_gamma(0.5 * model_.m() + hp.a0, 0.5 * ss + hp.b0, rng_);
    }
}

void Sampler::adapt() {
    for (int c = 0; c < 2; ++c) {
        Eigen::VectorXd& e = c == 0 ? scales.occupied : scales.empty;
        for (int d = 0; d < model_.D(); ++d) {
            if (proposed(c, d) == 0.0) continue;
            double rate = accepted(c, d) / proposed(c, d);
            if (rate > 0.25) e(d) *= 1.5;
            else if (rate < 0.05) e(d) *= 0.67;
        }
    }
    reset_acceptance();
}

void Sampler::reset_acceptance() {
    accepted.setZero();
    proposed.setZero();
}

PosteriorDraws run_chain(const Model& model, const McmcSchedule& sched, std::uint64_t seed,
                         std::uint64_t chain, const SplitMergeOptions& sm) {
    Rng init_rng(seed, 0x10000 + chain);
    Sampler smp(model, init_state(model, init_rng), seed, chain);
    smp.split_merge = sm;
    const long n_adapt = sched.n_adapt < 0 ? sched.n_burn : sched.n_adapt;
    for (long it = 0; it < sched.n_burn; ++it) {
        smp.sweep();
        if (it < n_adapt && (it + 1) % sched.adapt_every == 0) smp.adapt();
    }
    smp.reset_acceptance();

    const int m = model.m(), J = model.J();
    PosteriorDraws out;
    out.m = m;
    out.J = J;
    out.p = model.p();
    out.D = model.D();
    out.z.resize(sched.n_keep, m);
    out.loglik.resize(sched.n_keep, m);
    out.weights.resize(sched.n_keep, J);
    out.b_tau.resize(sched.n_keep);
    out.components.resize(sched.n_keep);
    for (long k = 0; k < sched.n_keep; ++k) {
        for (long t = 0; t < sched.thin; ++t) smp.sweep();
        const ChainState& s = smp.state();
        for (int i = 0; i < m; ++i) {
            out.z(k, i) = s.z[i];
            out.loglik(k, i) = loglik_individual(model, s, i);
        }
        if (model.ppmx()) {
            auto c = s.counts();
            for (int j = 0; j < J; ++j) out.weights(k, j) = static_cast<double>(c[j]) / m;
        } else {
            out.weights.row(k) = log_weight_matrix(model, s).array().exp().colwise().mean();
        }
        out.b_tau(k) = s.b_tau;
        auto c = s.counts();
        for (int j = 0; j < J; ++j) {
            if (c[j] == 0) continue;
            out.components[k].push_back({j, c[j], s.theta[j], s.tau2.row(j).transpose(), s.lam2.row(j).transpose()});
        }
    }
    out.moves = std::move(smp.moves);
    out.scales = smp.scales;
    out.theta_accept = Eigen::MatrixXd::Zero(2, model.D());
    for (int c = 0; c < 2; ++c)
        for (int d = 0; d < model.D(); ++d)
            if (smp.proposed(c, d) > 0) out.theta_accept(c, d) = smp.accepted(c, d) / smp.proposed(c, d);
    return out;
}

}  // namespace mfrm

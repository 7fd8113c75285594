#include "pdcal/betareg.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "pdcal/csv.hpp"
#include "pdcal/error.hpp"

namespace pdcal {

double inverse_link(Link link, double eta) {
    switch (link) {
        case Link::logit:
            if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
            return std::exp(eta) / (1.0 + std::exp(eta));
    }
    throw std::domain_error("unknown link");
}

double apply_link(Link link, double mu) {
    if (!(mu > 0.0 && mu < 1.0)) throw std::domain_error("link: mean must lie in (0,1)");
    switch (link) {
        case Link::logit:
            return std::log(mu) - std::log1p(-mu);
    }
    throw std::domain_error("unknown link");
}

Prediction predict_mean(const RegressionModel& model, std::span<const double> regressors) {
    if (regressors.size() != model.coefficients.size()) {
        throw InputError("predict: " + std::to_string(regressors.size()) + " regressors for a model with " +
                         std::to_string(model.coefficients.size()));
    }
    if (!(model.precision > 0.0)) throw InputError("predict: precision must be positive");
    double eta = model.intercept;
    for (std::size_t j = 0; j < regressors.size(); ++j) eta += model.coefficients[j] * regressors[j];
    const double mu = inverse_link(model.link, eta);
    if (!(mu > 0.0 && mu < 1.0)) {
        throw NumericError("predict: linear predictor " + std::to_string(eta) +
                           " saturates the link");
    }
    return {mu, BetaParams(mu * model.precision, (1.0 - mu) * model.precision)};
}

RegressionModel fit(const std::vector<Observation>& history, Link link) {
    if (history.empty()) throw InputError("fit: empty history");
    const std::size_t k = history.front().regressors.size();
    const std::size_t p = k + 1;
    const std::size_t n = history.size();
    if (n < p) {
        throw InputError("fit: " + std::to_string(n) + " observations cannot determine " +
                         std::to_string(p) + " coefficients");
    }
    Eigen::MatrixXd design(n, p);
    Eigen::VectorXd response(n);
    for (std::size_t t = 0; t < n; ++t) {
        const auto& obs = history[t];
        if (obs.regressors.size() != k) throw InputError("fit: ragged regressor rows");
        if (!(obs.mu > 0.0 && obs.mu < 1.0)) {
            throw InputError("fit: mean " + std::to_string(obs.mu) + " outside (0,1)");
        }
        design(t, 0) = 1.0;
        for (std::size_t j = 0; j < k; ++j) design(t, j + 1) = obs.regressors[j];
        response(t) = apply_link(link, obs.mu);
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (static_cast<std::size_t>(qr.rank()) < p) throw InputError("fit: rank-deficient design");
    const Eigen::VectorXd beta = qr.solve(response);

    RegressionModel model;
    model.link = link;
    model.intercept = beta(0);
    model.coefficients.assign(beta.data() + 1, beta.data() + p);

    // Ferrari & Cribari-Neto starting value: residual variance on the link
    // scale mapped back through g'(μ) = 1 / (μ(1 − μ)).
    const Eigen::VectorXd fitted = design * beta;
    const double rss = (response - fitted).squaredNorm();
    const double scale = 1e-20 * std::max(1.0, response.squaredNorm());
    if (n == p || rss <= scale) {
        model.precision = kUnidentifiedPrecision;
        model.precision_identified = false;
        return model;
    }
    double sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double mu = inverse_link(link, fitted(t));
        sum += 1.0 / (mu * (1.0 - mu));
    }
    const double phi = static_cast<double>(n - p) / rss * (sum / static_cast<double>(n)) - 1.0;
    if (phi > 0.0 && std::isfinite(phi)) {
        model.precision = phi;
    } else {
        model.precision = kUnidentifiedPrecision;
        model.precision_identified = false;
    }
    return model;
}

namespace {

LabelledRows parse_rows(std::istream& in, bool with_mu) {
    const auto table = csv::read_table(in);
    const auto& header = table.header.fields;
    const std::size_t fixed = with_mu ? 2 : 1;
    if (header.size() < fixed || header[0] != "period" || (with_mu && header[1] != "mu")) {
        throw InputError(with_mu ? "history: expected header period,mu,y1,...,yk"
                                 : "new data: expected header period,y1,...,yk",
                         table.header.line);
    }
    LabelledRows out;
    out.regressor_names.assign(header.begin() + static_cast<long>(fixed), header.end());
    for (const auto& row : table.rows) {
        if (row.fields.size() != header.size()) {
            throw InputError("expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(row.fields.size()),
                             row.line);
        }
        Observation obs{{}, 0.0};
        if (with_mu) {
            obs.mu = csv::parse_real(row.fields[1], row.line, "mu");
            if (!(obs.mu > 0.0 && obs.mu < 1.0)) throw InputError("mu outside (0,1)", row.line);
        }
        for (std::size_t j = fixed; j < row.fields.size(); ++j) {
            obs.regressors.push_back(csv::parse_real(row.fields[j], row.line, header[j]));
        }
        out.labels.push_back(row.fields[0]);
        out.rows.push_back(std::move(obs));
    }
    return out;
}

}  // namespace

LabelledRows parse_history_csv(std::istream& in) { return parse_rows(in, true); }

LabelledRows parse_newdata_csv(std::istream& in) { return parse_rows(in, false); }

}  // namespace pdcal

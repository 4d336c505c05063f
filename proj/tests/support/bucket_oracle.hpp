#pragma once

// Independent fluid token-bucket oracle in cumulative form: the maximal
// cumulative grant C_k satisfies
//   C_k = min( C_{k-1} + req_k,  min_{0<=j<k} ( C_j + burst + rate*(t_k - t_j) ) )
// with C_0 = 0 at t_0 = 0 (full bucket at creation). This is a different
// formulation from the token-level recurrence the shaper implements; the two
// must agree at every timestamp.

#include <algorithm>
#include <vector>

namespace piperate::testsupport {

struct BucketRequest {
    double at_seconds;
    double requested;
};

inline std::vector<double> fluid_bucket_grants(double rate, double burst,
                                               const std::vector<BucketRequest>& requests) {
    std::vector<double> cumulative{0.0};
    std::vector<double> times{0.0};
    std::vector<double> grants;
    for (const BucketRequest& r : requests) {
        double cap = cumulative[0] + burst + rate * (r.at_seconds - times[0]);
        for (std::size_t j = 1; j < cumulative.size(); ++j)
            cap = std::min(cap, cumulative[j] + burst + rate * (r.at_seconds - times[j]));
        const double c = std::min(cumulative.back() + r.requested, cap);
        grants.push_back(c - cumulative.back());
        cumulative.push_back(c);
        times.push_back(r.at_seconds);
    }
    return grants;
}

}  // namespace piperate::testsupport

#include "kcmlab/lapack.hpp"

#include <stdexcept>
#include <vector>

extern "C" {
void dsyevd_(const char* jobz, const char* uplo, const int* n, double* a, const int* lda,
             double* w, double* work, const int* lwork, int* iwork, const int* liwork, int* info);
}

namespace kcm {

void sym_eig(Eigen::MatrixXd& a, Eigen::VectorXd& evals, bool want_vectors) {
    const int n = int(a.rows());
    evals.resize(n);
    if (n == 0) return;
    const char jobz = want_vectors ? 'V' : 'N';
    const char uplo = 'L';
    int info = 0;
    int lwork = -1, liwork = -1;
    double work_query = 0.0;
    int iwork_query = 0;
    dsyevd_(&jobz, &uplo, &n, a.data(), &n, evals.data(), &work_query, &lwork, &iwork_query,
            &liwork, &info);
    if (info != 0) throw std::runtime_error("dsyevd workspace query failed");
    lwork = int(work_query);
    liwork = iwork_query;
    std::vector<double> work(lwork);
    std::vector<int> iwork(liwork);
    dsyevd_(&jobz, &uplo, &n, a.data(), &n, evals.data(), work.data(), &lwork, iwork.data(),
            &liwork, &info);
    if (info != 0) throw std::runtime_error("dsyevd failed to converge");
}

} // namespace kcm

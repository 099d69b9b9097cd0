#pragma once

#include <cstddef>

// Hot loops of the network core.  The OpenMP versions parallelize only over
// independent output elements and keep every reduction in a fixed sequential
// order, so results are bit-identical to the serial reference at any thread
// count (tests compare them with ==, tools/bench_kernels times them).
//
// Dense weights are stored transposed, [in, out], so the innermost loops run
// over contiguous output columns (axpy form).

namespace binquant::kernels {

namespace ref {

// y[b,o] = bias[o] + sum_i x[b,i] * wt[i,o]
template <typename T>
void dense_forward(const T* x, const T* wt, const T* bias, T* y,
                   std::size_t B, std::size_t I, std::size_t O) {
  for (std::size_t b = 0; b < B; ++b) {
    T* yb = y + b * O;
    for (std::size_t o = 0; o < O; ++o) yb[o] = bias[o];
    const T* xb = x + b * I;
    for (std::size_t i = 0; i < I; ++i) {
      T xv = xb[i];
      const T* wrow = wt + i * O;
      for (std::size_t o = 0; o < O; ++o) yb[o] += xv * wrow[o];
    }
  }
}

// dwt[i,o] = sum_b x[b,i] * dy[b,o]
template <typename T>
void dense_backward_dw(const T* x, const T* dy, T* dwt,
                       std::size_t B, std::size_t I, std::size_t O) {
  for (std::size_t i = 0; i < I; ++i) {
    T* dwi = dwt + i * O;
    for (std::size_t o = 0; o < O; ++o) dwi[o] = T(0);
    for (std::size_t b = 0; b < B; ++b) {
      T xv = x[b * I + i];
      const T* dyb = dy + b * O;
      for (std::size_t o = 0; o < O; ++o) dwi[o] += xv * dyb[o];
    }
  }
}

// dx[b,i] = sum_o dy[b,o] * wt[i,o]
template <typename T>
void dense_backward_dx(const T* dy, const T* wt, T* dx,
                       std::size_t B, std::size_t I, std::size_t O) {
  for (std::size_t b = 0; b < B; ++b) {
    const T* dyb = dy + b * O;
    T* dxb = dx + b * I;
    for (std::size_t i = 0; i < I; ++i) {
      const T* wrow = wt + i * O;
      T acc = T(0);
      for (std::size_t o = 0; o < O; ++o) acc += dyb[o] * wrow[o];
      dxb[i] = acc;
    }
  }
}

// db[o] = sum_b dy[b,o]
template <typename T>
void dense_backward_db(const T* dy, T* db, std::size_t B, std::size_t O) {
  for (std::size_t o = 0; o < O; ++o) {
    T acc = T(0);
    for (std::size_t b = 0; b < B; ++b) acc += dy[b * O + o];
    db[o] = acc;
  }
}

template <typename T>
void relu_forward(const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(const T* x, const T* dy, T* dx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
}

// Valid (no padding), stride 1.
// x [B,C,H,W], w [OC,C,K,K], y [B,OC,OH,OW] with OH=H-K+1, OW=W-K+1.
template <typename T>
void conv2d_forward(const T* x, const T* w, const T* bias, T* y,
                    std::size_t B, std::size_t C, std::size_t H, std::size_t W,
                    std::size_t OC, std::size_t K) {
  const std::size_t OH = H - K + 1, OW = W - K + 1;
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t oc = 0; oc < OC; ++oc) {
      T* yp = y + ((b * OC + oc) * OH) * OW;
      const T* wp = w + oc * C * K * K;
      for (std::size_t oh = 0; oh < OH; ++oh) {
        for (std::size_t ow = 0; ow < OW; ++ow) {
          T acc = bias[oc];
          for (std::size_t c = 0; c < C; ++c) {
            const T* xp = x + ((b * C + c) * H + oh) * W + ow;
            const T* wc = wp + c * K * K;
            for (std::size_t kh = 0; kh < K; ++kh)
              for (std::size_t kw = 0; kw < K; ++kw)
                acc += xp[kh * W + kw] * wc[kh * K + kw];
          }
          yp[oh * OW + ow] = acc;
        }
      }
    }
  }
}

// dw[oc,c,kh,kw] = sum_{b,oh,ow} dy[b,oc,oh,ow] * x[b,c,oh+kh,ow+kw]
template <typename T>
void conv2d_backward_dw(const T* x, const T* dy, T* dw,
                        std::size_t B, std::size_t C, std::size_t H, std::size_t W,
                        std::size_t OC, std::size_t K) {
  const std::size_t OH = H - K + 1, OW = W - K + 1;
  for (std::size_t oc = 0; oc < OC; ++oc) {
    T* dwp = dw + oc * C * K * K;
    for (std::size_t i = 0; i < C * K * K; ++i) dwp[i] = T(0);
    for (std::size_t b = 0; b < B; ++b) {
      const T* dyp = dy + ((b * OC + oc) * OH) * OW;
      for (std::size_t oh = 0; oh < OH; ++oh) {
        for (std::size_t ow = 0; ow < OW; ++ow) {
          T g = dyp[oh * OW + ow];
          for (std::size_t c = 0; c < C; ++c) {
            const T* xp = x + ((b * C + c) * H + oh) * W + ow;
            T* dwc = dwp + c * K * K;
            for (std::size_t kh = 0; kh < K; ++kh)
              for (std::size_t kw = 0; kw < K; ++kw)
                dwc[kh * K + kw] += g * xp[kh * W + kw];
          }
        }
      }
    }
  }
}

// dx[b,c,ih,iw] = sum over valid (oc,kh,kw) of dy[b,oc,ih-kh,iw-kw] * w[oc,c,kh,kw]
template <typename T>
void conv2d_backward_dx(const T* dy, const T* w, T* dx,
                        std::size_t B, std::size_t C, std::size_t H, std::size_t W,
                        std::size_t OC, std::size_t K) {
  const std::size_t OH = H - K + 1, OW = W - K + 1;
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < C; ++c) {
      T* dxp = dx + ((b * C + c) * H) * W;
      for (std::size_t i = 0; i < H * W; ++i) dxp[i] = T(0);
      for (std::size_t oc = 0; oc < OC; ++oc) {
        const T* dyp = dy + ((b * OC + oc) * OH) * OW;
        const T* wp = w + (oc * C + c) * K * K;
        for (std::size_t oh = 0; oh < OH; ++oh)
          for (std::size_t ow = 0; ow < OW; ++ow) {
            T g = dyp[oh * OW + ow];
            for (std::size_t kh = 0; kh < K; ++kh)
              for (std::size_t kw = 0; kw < K; ++kw)
                dxp[(oh + kh) * W + (ow + kw)] += g * wp[kh * K + kw];
          }
      }
    }
  }
}

template <typename T>
void conv2d_backward_db(const T* dy, T* db,
                        std::size_t B, std::size_t OC, std::size_t OH, std::size_t OW) {
  for (std::size_t oc = 0; oc < OC; ++oc) {
    T acc = T(0);
    for (std::size_t b = 0; b < B; ++b) {
      const T* dyp = dy + ((b * OC + oc) * OH) * OW;
      for (std::size_t i = 0; i < OH * OW; ++i) acc += dyp[i];
    }
    db[oc] = acc;
  }
}

}  // namespace ref

template <typename T>
void dense_forward(const T* x, const T* wt, const T* bias, T* y,
                   std::size_t B, std::size_t I, std::size_t O) {
#pragma omp parallel for
  for (std::size_t b = 0; b < B; ++b) {
    T* yb = y + b * O;
    for (std::size_t o = 0; o < O; ++o) yb[o] = bias[o];
    const T* xb = x + b * I;
    for (std::size_t i = 0; i < I; ++i) {
      T xv = xb[i];
      const T* wrow = wt + i * O;
      for (std::size_t o = 0; o < O; ++o) yb[o] += xv * wrow[o];
    }
  }
}

template <typename T>
void dense_backward_dw(const T* x, const T* dy, T* dwt,
                       std::size_t B, std::size_t I, std::size_t O) {
#pragma omp parallel for
  for (std::size_t i = 0; i < I; ++i) {
    T* dwi = dwt + i * O;
    for (std::size_t o = 0; o < O; ++o) dwi[o] = T(0);
    for (std::size_t b = 0; b < B; ++b) {
      T xv = x[b * I + i];
      const T* dyb = dy + b * O;
      for (std::size_t o = 0; o < O; ++o) dwi[o] += xv * dyb[o];
    }
  }
}

template <typename T>
void dense_backward_dx(const T* dy, const T* wt, T* dx,
                       std::size_t B, std::size_t I, std::size_t O) {
#pragma omp parallel for
  for (std::size_t b = 0; b < B; ++b) {
    const T* dyb = dy + b * O;
    T* dxb = dx + b * I;
    for (std::size_t i = 0; i < I; ++i) {
      const T* wrow = wt + i * O;
      T acc = T(0);
      for (std::size_t o = 0; o < O; ++o) acc += dyb[o] * wrow[o];
      dxb[i] = acc;
    }
  }
}

template <typename T>
void dense_backward_db(const T* dy, T* db, std::size_t B, std::size_t O) {
#pragma omp parallel for
  for (std::size_t o = 0; o < O; ++o) {
    T acc = T(0);
    for (std::size_t b = 0; b < B; ++b) acc += dy[b * O + o];
    db[o] = acc;
  }
}

template <typename T>
void relu_forward(const T* x, T* y, std::size_t n) {
#pragma omp parallel for
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(const T* x, const T* dy, T* dx, std::size_t n) {
#pragma omp parallel for
  for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
}

template <typename T>
void conv2d_forward(const T* x, const T* w, const T* bias, T* y,
                    std::size_t B, std::size_t C, std::size_t H, std::size_t W,
                    std::size_t OC, std::size_t K) {
  const std::size_t OH = H - K + 1, OW = W - K + 1;
#pragma omp parallel for
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t oc = 0; oc < OC; ++oc) {
      T* yp = y + ((b * OC + oc) * OH) * OW;
      const T* wp = w + oc * C * K * K;
      for (std::size_t oh = 0; oh < OH; ++oh) {
        for (std::size_t ow = 0; ow < OW; ++ow) {
          T acc = bias[oc];
          for (std::size_t c = 0; c < C; ++c) {
            const T* xp = x + ((b * C + c) * H + oh) * W + ow;
            const T* wc = wp + c * K * K;
            for (std::size_t kh = 0; kh < K; ++kh)
              for (std::size_t kw = 0; kw < K; ++kw)
                acc += xp[kh * W + kw] * wc[kh * K + kw];
          }
          yp[oh * OW + ow] = acc;
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_dw(const T* x, const T* dy, T* dw,
                        std::size_t B, std::size_t C, std::size_t H, std::size_t W,
                        std::size_t OC, std::size_t K) {
  const std::size_t OH = H - K + 1, OW = W - K + 1;
#pragma omp parallel for
  for (std::size_t oc = 0; oc < OC; ++oc) {
    T* dwp = dw + oc * C * K * K;
    for (std::size_t i = 0; i < C * K * K; ++i) dwp[i] = T(0);
    for (std::size_t b = 0; b < B; ++b) {
      const T* dyp = dy + ((b * OC + oc) * OH) * OW;
      for (std::size_t oh = 0; oh < OH; ++oh) {
        for (std::size_t ow = 0; ow < OW; ++ow) {
          T g = dyp[oh * OW + ow];
          for (std::size_t c = 0; c < C; ++c) {
            const T* xp = x + ((b * C + c) * H + oh) * W + ow;
            T* dwc = dwp + c * K * K;
            for (std::size_t kh = 0; kh < K; ++kh)
              for (std::size_t kw = 0; kw < K; ++kw)
                dwc[kh * K + kw] += g * xp[kh * W + kw];
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_dx(const T* dy, const T* w, T* dx,
                        std::size_t B, std::size_t C, std::size_t H, std::size_t W,
                        std::size_t OC, std::size_t K) {
  const std::size_t OH = H - K + 1, OW = W - K + 1;
#pragma omp parallel for
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < C; ++c) {
      T* dxp = dx + ((b * C + c) * H) * W;
      for (std::size_t i = 0; i < H * W; ++i) dxp[i] = T(0);
      for (std::size_t oc = 0; oc < OC; ++oc) {
        const T* dyp = dy + ((b * OC + oc) * OH) * OW;
        const T* wp = w + (oc * C + c) * K * K;
        for (std::size_t oh = 0; oh < OH; ++oh)
          for (std::size_t ow = 0; ow < OW; ++ow) {
            T g = dyp[oh * OW + ow];
            for (std::size_t kh = 0; kh < K; ++kh)
              for (std::size_t kw = 0; kw < K; ++kw)
                dxp[(oh + kh) * W + (ow + kw)] += g * wp[kh * K + kw];
          }
      }
    }
  }
}

template <typename T>
void conv2d_backward_db(const T* dy, T* db,
                        std::size_t B, std::size_t OC, std::size_t OH, std::size_t OW) {
#pragma omp parallel for
  for (std::size_t oc = 0; oc < OC; ++oc) {
    T acc = T(0);
    for (std::size_t b = 0; b < B; ++b) {
      const T* dyp = dy + ((b * OC + oc) * OH) * OW;
      for (std::size_t i = 0; i < OH * OW; ++i) acc += dyp[i];
    }
    db[oc] = acc;
  }
}

}  // namespace binquant::kernels

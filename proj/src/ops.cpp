#include "bdss/ops.hpp"

namespace bdss {

int field_of_view(int kernel_extent, int dilation) {
  if (kernel_extent < 1 || kernel_extent % 2 == 0)
    throw config_error("field_of_view: kernel extent must be odd and >= 1, got " +
                       std::to_string(kernel_extent));
  if (dilation < 1)
    throw config_error("field_of_view: dilation must be >= 1, got " + std::to_string(dilation));
  return (kernel_extent + 1) * dilation - 1;
}

ConvGeometry conv_geometry(const Shape& input, const Shape& kernel, const Shape& bias,
                           int dilation, int padding) {
  if (input.size() != 4)
    throw config_error("conv2d: input must be rank 4 (B,C,H,W), got " + shape_str(input));
  if (kernel.size() != 4 || kernel[2] != kernel[3])
    throw config_error("conv2d: kernel must be (Cout,Cin,k,k), got " + shape_str(kernel));
  if (bias.size() != 1 || bias[0] != kernel[0])
    throw config_error("conv2d: bias shape " + shape_str(bias) + " does not match " +
                       std::to_string(kernel[0]) + " output channels");
  if (dilation < 1) throw config_error("conv2d: dilation must be >= 1");
  if (padding < 0) throw config_error("conv2d: padding must be >= 0");
  if (input[1] != kernel[1])
    throw config_error("conv2d: input has " + std::to_string(input[1]) +
                       " channels but kernel expects " + std::to_string(kernel[1]));
  ConvGeometry g;
  g.batch = input[0];
  g.in_channels = input[1];
  g.in_h = input[2];
  g.in_w = input[3];
  g.out_channels = kernel[0];
  g.k = kernel[2];
  g.dilation = dilation;
  g.padding = padding;
  g.out_h = g.in_h + 2 * padding - dilation * (g.k - 1);
  g.out_w = g.in_w + 2 * padding - dilation * (g.k - 1);
  if (g.out_h <= 0 || g.out_w <= 0)
    throw geometry_error("conv2d: output extent " + std::to_string(g.out_h) + "x" +
                         std::to_string(g.out_w) + " for input " + shape_str(input) +
                         ", k=" + std::to_string(g.k) + ", dilation=" + std::to_string(dilation) +
                         ", padding=" + std::to_string(padding));
  return g;
}

}  // namespace bdss

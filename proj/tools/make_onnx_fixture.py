#!/usr/bin/env python3
"""Writes the tiny ONNX network used by the OpenCV provider test.

The graph is a single 1x1 convolution from 3 to 4 channels followed by a
2x2 average pool, with weights small enough to check by hand:

    out[c] = sum_ch W[c][ch] * x[ch] + b[c]

Usage: make_onnx_fixture.py OUTPUT.onnx
"""

import sys

import numpy as np
import onnx
from onnx import TensorProto, helper, numpy_helper

WEIGHTS = np.array(
    [[1.0, 0.0, 0.0],
     [0.0, 1.0, 0.0],
     [0.0, 0.0, 1.0],
     [0.5, -0.25, 2.0]],
    dtype=np.float32,
).reshape(4, 3, 1, 1)
BIAS = np.array([0.0, 1.0, -1.0, 0.125], dtype=np.float32)


def build():
    w = numpy_helper.from_array(WEIGHTS, "w")
    b = numpy_helper.from_array(BIAS, "b")
    conv = helper.make_node("Conv", ["input", "w", "b"], ["conv"], kernel_shape=[1, 1])
    pool = helper.make_node("AveragePool", ["conv"], ["output"], kernel_shape=[2, 2],
                            strides=[2, 2])
    graph = helper.make_graph(
        [conv, pool],
        "pvqa_fixture",
        [helper.make_tensor_value_info("input", TensorProto.FLOAT, [1, 3, 8, 8])],
        [helper.make_tensor_value_info("output", TensorProto.FLOAT, [1, 4, 4, 4])],
        initializer=[w, b],
    )
    model = helper.make_model(graph, opset_imports=[helper.make_opsetid("", 11)])
    model.ir_version = 6
    onnx.checker.check_model(model)
    return model


def main():
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    onnx.save(build(), sys.argv[1])


if __name__ == "__main__":
    main()

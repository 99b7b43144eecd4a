"""Explicit 4-lane float32 vector operations for numba-compiled kernels.

``float32x4`` lowers to an LLVM ``<4 x float>`` value, so every operation
below maps onto one SSE/AVX instruction on x86. Multiplies and adds are
emitted as separate instructions without fast-math flags; LLVM never fuses
them, which keeps the vector kernel bit-compatible with scalar code that
performs the same operations in the same order.
"""

from llvmlite import ir
from numba import types
from numba.core import cgutils
from numba.extending import intrinsic, models, register_model

#: Lanes per vector register.
WIDTH = 4

_VEC = ir.VectorType(ir.FloatType(), WIDTH)
_I32 = ir.IntType(32)
_I8P = ir.IntType(8).as_pointer()


class Float32x4(types.Type):
    def __init__(self):
        super().__init__(name="float32x4")


float32x4 = Float32x4()


@register_model(Float32x4)
class _Float32x4Model(models.PrimitiveModel):
    def __init__(self, dmm, fe_type):
        super().__init__(dmm, fe_type, _VEC)


def _element_ptr(context, builder, arrty, arr, idx):
    ary = context.make_array(arrty)(context, builder, arr)
    return builder.gep(ary.data, [idx])


def _check_f32_array(arr):
    if not (isinstance(arr, types.Array) and arr.ndim == 1 and arr.dtype == types.float32):
        raise TypeError("expected a 1-D float32 array")


def _vector_load(align):
    def typer(typingctx, arr, idx):
        _check_f32_array(arr)

        def codegen(context, builder, sig, args):
            ptr = _element_ptr(context, builder, sig.args[0], args[0], args[1])
            return builder.load(builder.bitcast(ptr, _VEC.as_pointer()), align=align)

        return float32x4(arr, idx), codegen

    return typer


vload = intrinsic(_vector_load(4))
vload.__doc__ = "Load 4 consecutive floats starting at ``arr[idx]`` (no alignment needed)."

vload_aligned = intrinsic(_vector_load(4 * WIDTH))
vload_aligned.__doc__ = "Load 4 floats from a 16-byte aligned address."


@intrinsic
def vzero(typingctx):
    def codegen(context, builder, sig, args):
        return ir.Constant(_VEC, [0.0] * WIDTH)

    return float32x4(), codegen


@intrinsic
def vmul(typingctx, x, y):
    def codegen(context, builder, sig, args):
        return builder.fmul(args[0], args[1])

    return float32x4(float32x4, float32x4), codegen


@intrinsic
def vadd(typingctx, x, y):
    def codegen(context, builder, sig, args):
        return builder.fadd(args[0], args[1])

    return float32x4(float32x4, float32x4), codegen


@intrinsic
def vlane(typingctx, x, lane):
    def codegen(context, builder, sig, args):
        idx = builder.trunc(args[1], _I32) if args[1].type.width > 32 else args[1]
        return builder.extract_element(args[0], idx)

    return types.float32(float32x4, lane), codegen


@intrinsic
def vreduce(typingctx, x):
    """Sum the lanes as ``(l0 + l1) + (l2 + l3)``."""

    def codegen(context, builder, sig, args):
        v = args[0]
        lanes = [builder.extract_element(v, ir.Constant(_I32, i)) for i in range(WIDTH)]
        return builder.fadd(builder.fadd(lanes[0], lanes[1]), builder.fadd(lanes[2], lanes[3]))

    return types.float32(float32x4), codegen


@intrinsic
def prefetch(typingctx, arr, idx):
    """Non-faulting read prefetch of ``arr[idx]`` into L1; bounds are not checked."""
    _check_f32_array(arr)

    def codegen(context, builder, sig, args):
        ptr = _element_ptr(context, builder, sig.args[0], args[0], args[1])
        fnty = ir.FunctionType(ir.VoidType(), [_I8P, _I32, _I32, _I32])
        fn = cgutils.get_or_insert_function(builder.module, fnty, "llvm.prefetch.p0")
        # rw=0 (read), locality=3 (keep in all levels), cache type=1 (data)
        builder.call(
            fn,
            [builder.bitcast(ptr, _I8P), ir.Constant(_I32, 0), ir.Constant(_I32, 3), ir.Constant(_I32, 1)],
        )
        return context.get_dummy_value()

    return types.none(arr, idx), codegen

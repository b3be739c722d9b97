from .ecc import EccRedundancy, ecc_decode, ecc_encode, ecc_recover
from .rs import RSCode, rs_correct, rs_encode
from .hamsketch import HamParams, HamSketch, ham_build_many, ham_decode_many, ham_sketch_build, ham_sketch_decode, ham_sketch_stream

"""polarforge: polar code construction by degrading and iteratively
upgrading bit-channel output alphabets."""

from ._kernels import active_backend
from .channel import (
    BmsChannel,
    ChannelError,
    ChannelFunctionals,
    InvariantViolation,
    SymbolPair,
    bec,
    bhattacharyya,
    bsc,
    canonicalize,
    capacity,
    channel_from_file,
    channel_from_spec,
    error_prob,
    functionals,
    lr,
)
from .construct import (
    BitIndexPath,
    CodeDesign,
    GeneratorRows,
    approx_bit_channel,
    design_code,
    encode,
    generator_matrix,
    generator_rows,
    load_design,
    save_design,
    select_info_set,
)
from .degrade import (
    DegradeMergeRecord,
    degrading_merge,
    merge_degrade_pair,
    verify_degrade_witness,
)
from .oracle import BitChannelOracle, bec_recursion, exact_bit_channel
from .transform import TransformKind, minus, plus, transform
from .upgrade import (
    UpgradeAdjustment,
    UpgradeMergeRecord,
    apply_upgrade_record,
    fixed_window_excess,
    merge_upgrade_2,
    merge_upgrade_3,
    merge_upgrade_window,
    upgrading_merge,
    verify_upgrade_witness,
)

__version__ = "0.1.0"

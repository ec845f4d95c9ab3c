"""qpeg: image compression with matrix product states.

Images are cast into real kets by renormalization-group addressing,
factorized as matrix product states and compressed by bond-dimension
truncation.  ``qzip`` is the lossless variant.
"""
from .codec import (
    Metrics,
    QpegConfig,
    decode,
    psnr,
    qpeg_decode,
    qpeg_encode,
    qzip_decode,
    qzip_encode,
)
from .container import Container, pack_payload, parse_container, unpack_payload
from .errors import (
    DomainError,
    EncodeError,
    FormatError,
    QpegError,
    ResourceError,
    UnsupportedVersionError,
)
from .imageio import (
    BoxLayout,
    ImageGrid,
    load_pgm,
    merge_boxes,
    pad_and_split,
    read_pgm,
    save_pgm,
    write_pgm,
)
from .mps import (
    uniform_parameter_count,
    MPS,
    AlsConfig,
    AlsResult,
    SchmidtSpectrum,
    als_local_update,
    als_truncate,
    bond_entropies,
    exact_mps,
    parameter_count,
    reconstruct,
    schmidt_spectrum,
    svd_truncate,
)
from .rgmap import AddressScheme, Ket, digits_to_pixel, image_to_ket, ket_to_image, pixel_to_digits
from .transform import dct2, idct2

__version__ = "0.1.0"

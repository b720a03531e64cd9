__version__ = "0.1.0"

# main api functions
from .api import (
    compute_mc,
    config_dict,
    export_profile,
    scan,
    scan_to_dataframe,
    search,
    verify,
)
from .config import RunConfig, load_config
from .exceptions import (
    ConfigError,
    ExportError,
    GridMismatchError,
    IdentityError,
    NumericalError,
    ProfileError,
    ResolutionError,
    StationarityError,
    ValidationError,
    ZclError,
)

from .error_utils import *
from .log_utils import *
from .numpy_utils import *
from .file_utils import *
from .prob_utils import *
from .solver_utils import *
from .belief_utils import *
from .dec_utils import *
from .estimator_utils import *
from .env_utils import *
from .e2d_utils import *
from .linbandit_utils import *
from .rmdp_utils import *
from .rmdp_market_utils import *
from .scenario_utils import *
from .harness_utils import *
from .oracle_utils import *

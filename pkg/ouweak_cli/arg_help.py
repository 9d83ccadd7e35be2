ENV       = 'directory holding env.json, the user defaults'
MODEL     = 'model file: n, Q and B rows, or lambdas'
LAMBDAS   = 'rates of a diagonal model (Q = I, B = -diag(lambdas))'
SEED      = 'root seed of every random stream'
THREADS   = 'worker threads; results do not depend on it'
OUTPUT    = 'table destination, - for stdout'
FORMAT    = 'table format'
POINT     = 'point coordinates'
TIMES     = 'positive times'
FUNCTION  = 'test function family'
CENTER    = 'center of the test function, repeat for several centers'
WIDTH     = 'bump width or box half width'
GLOBAL_K  = 'number of global coordinates of the test function'
ORDER     = 'Gauss-Hermite order per axis'
ROUTE     = 'evaluate through the transition law or through the kernel'
GRID_SIZE = 'number of points of the default log-spaced time grid'
BUDGET    = 'Monte Carlo sample budget'

ENV       = 'DIRECTORY'
MODEL     = 'MODEL-FILE'
LAMBDAS   = 'LAMBDA'
SEED      = 'SEED'
THREADS   = 'N'
OUTPUT    = 'FILE'
POINT     = 'X'
TIMES     = 'T'
CENTER    = 'X'
LEMMA     = 'LEMMA-ID'
KEY       = 'KEY'
VALUE     = 'VALUE'

# generated - do not edit
GIT_REPO    = ""
GIT_BRANCH  = ""
GIT_DATE    = ""
GIT_HASH    = ""
TAG_VERSION = "v0.1.0"
DIRTY       = False

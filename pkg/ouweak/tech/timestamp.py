from datetime import datetime, timezone


_FORMAT = '%Y%m%dT%H%M%S%f%z'


def timestamp():
    '''
        A string representation of this moment.

        Microsecond resolution and time zone, so that reports from different
        machines can be compared when parsed back.
    '''
    return datetime.now(timezone.utc).astimezone().strftime(_FORMAT)


def time_from_timestamp(timestamp_str):
    '''
        Parse a datetime from a timestamp string - strict!
    '''
    try:
        return datetime.strptime(timestamp_str, _FORMAT)
    except ValueError:
        raise ValueError('Not a full, basic timestamp', timestamp_str)

from .common import *

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': ':memory:',
    }
}

LOGGING['loggers']['optim']['level'] = 'WARNING'
LOGGING['loggers']['bench']['level'] = 'WARNING'

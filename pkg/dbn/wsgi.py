"""
WSGI config for the DBNode admin site.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "dbn.settings")

application = get_wsgi_application()

# dbn/urls.py
from django.contrib import admin
from django.urls import path

urlpatterns = [
    # Ledger and cluster registry inspection
    path('admin/', admin.site.urls),
]
